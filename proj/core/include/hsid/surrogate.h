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

#ifndef HSID_SURROGATE_H_
#define HSID_SURROGATE_H_

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

namespace hsid {

// Output of one exact evaluation: f(x) in R^m and df/dx in R^{m x d}.
struct MapSample {
  Eigen::VectorXd value;
  Eigen::MatrixXd jacobian;
};

// A costly map from a low-dimensional input to a high-dimensional output.
// Implementations must be callable concurrently.
class ExpensiveMap {
 public:
  virtual ~ExpensiveMap() = default;
  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  virtual MapSample Evaluate(const Eigen::VectorXd& x) const = 0;
};

// Result of a surrogate query. `hessian[l]` is the derivative of `jacobian`
// with respect to x_l and is only filled when requested.
struct MapQuery {
  Eigen::VectorXd value;
  Eigen::MatrixXd jacobian;
  std::vector<Eigen::MatrixXd> hessian;
};

// Anything that answers f queries and counts how often it called the
// backing map: the hierarchical grid, or the exact bypass used as baseline.
class Surrogate {
 public:
  virtual ~Surrogate() = default;
  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  virtual MapQuery Query(const Eigen::VectorXd& x, bool with_hessian) = 0;
  virtual std::int64_t exact_eval_count() const = 0;
  // Current refinement level, or -1 for exact evaluation.
  virtual int level() const = 0;
};

// Calls the backing map for every query (no interpolation). Bitwise
// identical inputs are served from a bounded FIFO memo. Second derivatives
// are central differences of exact Jacobians; those calls are counted too.
class ExactBypass final : public Surrogate {
 public:
  explicit ExactBypass(std::shared_ptr<const ExpensiveMap> map,
                       double hessian_step = 1e-4,
                       std::size_t memo_capacity = 4096);

  int input_dim() const override { return map_->input_dim(); }
  int output_dim() const override { return map_->output_dim(); }
  MapQuery Query(const Eigen::VectorXd& x, bool with_hessian) override;
  std::int64_t exact_eval_count() const override;
  int level() const override { return -1; }

 private:
  MapSample Lookup(const Eigen::VectorXd& x);

  std::shared_ptr<const ExpensiveMap> map_;
  double hessian_step_;
  std::size_t memo_capacity_;
  mutable std::mutex mu_;
  std::map<std::vector<double>, MapSample> memo_;
  std::deque<std::vector<double>> order_;
  std::int64_t count_ = 0;
};

}  // namespace hsid

#endif  // HSID_SURROGATE_H_
