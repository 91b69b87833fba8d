// Copyright 2026 The hsid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HSID_ERROR_H_
#define HSID_ERROR_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace hsid {

// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// refine() called at the maximum level R.
class LevelExhaustedError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Geometry or mesh that violates a model invariant.
class ModelError : public Error {
 public:
  using Error::Error;
};

// A nonlinear solve did not converge. Carries the point at which the
// expensive map was being evaluated (empty if not applicable) and the last
// residual norm.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<double> position,
              double residual)
      : Error(what), position_(std::move(position)), residual_(residual) {}

  const std::vector<double>& position() const { return position_; }
  double residual() const { return residual_; }

 private:
  std::vector<double> position_;
  double residual_;
};

// Non-finite state encountered while time stepping.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, int step) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

}  // namespace hsid

#endif  // HSID_ERROR_H_
