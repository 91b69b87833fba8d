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

#include "hsid/surrogate.h"

#include <cmath>
#include <utility>

#include "hsid/error.h"

namespace hsid {

ExactBypass::ExactBypass(std::shared_ptr<const ExpensiveMap> map,
                         double hessian_step, std::size_t memo_capacity)
    : map_(std::move(map)),
      hessian_step_(hessian_step),
      memo_capacity_(memo_capacity) {
  if (!map_) throw InvalidInputError("ExactBypass: null map");
}

MapSample ExactBypass::Lookup(const Eigen::VectorXd& x) {
  std::vector<double> key(x.data(), x.data() + x.size());
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  MapSample sample = map_->Evaluate(x);
  std::lock_guard<std::mutex> lock(mu_);
  ++count_;
  if (memo_capacity_ > 0 && !memo_.count(key)) {
    if (memo_.size() >= memo_capacity_) {
      memo_.erase(order_.front());
      order_.pop_front();
    }
    memo_.emplace(key, sample);
    order_.push_back(std::move(key));
  }
  return sample;
}

MapQuery ExactBypass::Query(const Eigen::VectorXd& x, bool with_hessian) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw InvalidInputError("ExactBypass: non-finite query");
  }
  MapSample s = Lookup(x);
  MapQuery q{std::move(s.value), std::move(s.jacobian), {}};
  if (with_hessian) {
    const int d = input_dim();
    q.hessian.resize(d);
    for (int l = 0; l < d; ++l) {
      Eigen::VectorXd xp = x, xm = x;
      xp[l] += hessian_step_;
      xm[l] -= hessian_step_;
      q.hessian[l] =
          (Lookup(xp).jacobian - Lookup(xm).jacobian) / (2.0 * hessian_step_);
    }
  }
  return q;
}

std::int64_t ExactBypass::exact_eval_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return count_;
}

}  // namespace hsid
