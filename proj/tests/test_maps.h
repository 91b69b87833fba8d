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

// Synthetic backing maps with known derivatives, shared by the tests.

#ifndef HSID_TESTS_TEST_MAPS_H_
#define HSID_TESTS_TEST_MAPS_H_

#include <atomic>
#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "hsid/surrogate.h"

namespace hsid::testing {

// Generic map from closures. Counts calls.
class LambdaMap : public ExpensiveMap {
 public:
  using Fn = std::function<MapSample(const Eigen::VectorXd&)>;
  LambdaMap(int d, int m, Fn fn) : d_(d), m_(m), fn_(std::move(fn)) {}
  int input_dim() const override { return d_; }
  int output_dim() const override { return m_; }
  MapSample Evaluate(const Eigen::VectorXd& x) const override {
    ++calls_;
    return fn_(x);
  }
  long calls() const { return calls_.load(); }

 private:
  int d_, m_;
  Fn fn_;
  mutable std::atomic<long> calls_{0};
};

// Output k is prod_i sin(w_k x_i + phase_{k,i}); fully coupled across inputs.
inline MapSample SineProduct(const Eigen::VectorXd& x, int m) {
  const int d = static_cast<int>(x.size());
  MapSample s{Eigen::VectorXd(m), Eigen::MatrixXd(m, d)};
  for (int k = 0; k < m; ++k) {
    const double w = 1.0 + 0.25 * k;
    Eigen::VectorXd sn(d), cs(d);
    for (int i = 0; i < d; ++i) {
      const double a = w * x[i] + 0.3 + 0.4 * i + 0.1 * k;
      sn[i] = std::sin(a);
      cs[i] = std::cos(a);
    }
    s.value[k] = sn.prod();
    for (int j = 0; j < d; ++j) {
      double p = w * cs[j];
      for (int i = 0; i < d; ++i) {
        if (i != j) p *= sn[i];
      }
      s.jacobian(k, j) = p;
    }
  }
  return s;
}

inline std::shared_ptr<LambdaMap> MakeSineProductMap(int d, int m) {
  return std::make_shared<LambdaMap>(
      d, m, [m](const Eigen::VectorXd& x) { return SineProduct(x, m); });
}

}  // namespace hsid::testing

#endif  // HSID_TESTS_TEST_MAPS_H_
