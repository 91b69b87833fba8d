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

#include "hsid/hierarchical_grid.h"

#include <cmath>
#include <mutex>
#include <sstream>

#include "hsid/error.h"
#include "hsid/hermite.h"

namespace hsid {

int MaxRefinements(double base_cell, double threshold) {
  if (!(base_cell > 0) || !(threshold > 0)) {
    throw InvalidInputError("grid: base cell and threshold must be positive");
  }
  int r = 0;
  while (std::ldexp(base_cell, -r) > threshold) ++r;
  return r;
}

HierarchicalGrid::HierarchicalGrid(std::shared_ptr<const ExpensiveMap> map,
                                   double base_cell, double threshold)
    : map_(std::move(map)),
      dim_(map_ ? map_->input_dim() : 0),
      out_dim_(map_ ? map_->output_dim() : 0),
      base_cell_(base_cell),
      threshold_(threshold),
      max_level_(MaxRefinements(base_cell, threshold)) {
  if (!map_) throw InvalidInputError("grid: null backing map");
  if (dim_ < 1 || dim_ > 16) throw InvalidInputError("grid: input dimension must be in [1, 16]");
  per_level_.assign(max_level_ + 1, 0);
}

double HierarchicalGrid::CellSize(int level) const {
  return std::ldexp(base_cell_, -level);
}

std::vector<LatticeCoord> HierarchicalGrid::LocateCell(const Eigen::VectorXd& x,
                                                       int level) const {
  if (x.size() != dim_) throw InvalidInputError("grid: query has wrong dimension");
  if (level < 0 || level > max_level_) throw InvalidInputError("grid: level out of range");
  const double h = CellSize(level);
  std::vector<std::int64_t> lower(dim_);
  for (int k = 0; k < dim_; ++k) {
    if (!std::isfinite(x[k])) throw InvalidInputError("grid: non-finite query");
    lower[k] = static_cast<std::int64_t>(std::floor(x[k] / h));
  }
  std::vector<LatticeCoord> cell(std::size_t{1} << dim_);
  for (std::size_t c = 0; c < cell.size(); ++c) {
    cell[c].level = level;
    cell[c].index = lower;
    for (int k = 0; k < dim_; ++k) cell[c].index[k] += (c >> k) & 1U;
  }
  return cell;
}

HierarchicalGrid::Key HierarchicalGrid::Canonical(const LatticeCoord& c) const {
  if (c.level < 0 || c.level > max_level_) throw InvalidInputError("grid: level out of range");
  Key key(c.index);
  const int shift = max_level_ - c.level;
  for (auto& k : key) k *= std::int64_t{1} << shift;
  return key;
}

Eigen::VectorXd HierarchicalGrid::KeyPosition(const Key& key) const {
  const double h = CellSize(max_level_);
  Eigen::VectorXd p(dim_);
  for (int k = 0; k < dim_; ++k) p[k] = static_cast<double>(key[k]) * h;
  return p;
}

Eigen::VectorXd HierarchicalGrid::Position(const LatticeCoord& c) const {
  return KeyPosition(Canonical(c));
}

void HierarchicalGrid::Insert(const Key& key, std::shared_ptr<const CornerSample> sample,
                              int level) {
  if (store_.emplace(key, Entry{std::move(sample), level}).second) {
    ++per_level_[level];
  }
}

int HierarchicalGrid::EnsureCorners(std::span<const LatticeCoord> cell) {
  int calls = 0;
  for (const LatticeCoord& c : cell) {
    Key key = Canonical(c);
    {
      std::shared_lock lock(mu_);
      if (store_.count(key)) continue;
    }
    auto sample = std::make_shared<CornerSample>();
    sample->position = KeyPosition(key);
    MapSample s;
    try {
      s = map_->Evaluate(sample->position);
    } catch (const SolverError&) {
      throw;
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << e.what() << " (corner at " << sample->position.transpose() << ")";
      throw SolverError(msg.str(),
                        {sample->position.data(), sample->position.data() + dim_},
                        std::nan(""));
    }
    if (s.value.size() != out_dim_ || s.jacobian.rows() != out_dim_ ||
        s.jacobian.cols() != dim_) {
      throw InvalidInputError("grid: backing map returned wrong shape");
    }
    sample->value = std::move(s.value);
    sample->jacobian = std::move(s.jacobian);
    ++calls;
    std::unique_lock lock(mu_);
    Insert(key, std::move(sample), c.level);
  }
  return calls;
}

MapQuery HierarchicalGrid::Interpolate(const Eigen::VectorXd& x, bool with_hessian) {
  const auto cell = LocateCell(x, level_);
  return InterpolateInCell(x, cell[0].index, with_hessian);
}

MapQuery HierarchicalGrid::InterpolateInCell(const Eigen::VectorXd& x,
                                             const std::vector<std::int64_t>& lower,
                                             bool with_hessian) {
  if (x.size() != dim_ || static_cast<int>(lower.size()) != dim_) {
    throw InvalidInputError("grid: query has wrong dimension");
  }
  std::vector<LatticeCoord> cell(std::size_t{1} << dim_);
  for (std::size_t c = 0; c < cell.size(); ++c) {
    cell[c].level = level_;
    cell[c].index = lower;
    for (int k = 0; k < dim_; ++k) cell[c].index[k] += (c >> k) & 1U;
  }
  const int calls = EnsureCorners(cell);

  std::vector<std::shared_ptr<const CornerSample>> keep(cell.size());
  std::vector<const MapSample*> ptrs(cell.size());
  {
    std::unique_lock lock(mu_);
    ++queries_;
    if (calls > 0) trace_.emplace_back(queries_, static_cast<std::int64_t>(store_.size()));
    for (std::size_t c = 0; c < cell.size(); ++c) keep[c] = store_.at(Canonical(cell[c])).sample;
  }
  for (std::size_t c = 0; c < cell.size(); ++c) ptrs[c] = keep[c].get();
  const double h = cell_size();
  Eigen::VectorXd local(dim_);
  for (int k = 0; k < dim_; ++k) local[k] = x[k] / h - static_cast<double>(lower[k]);
  return InterpolateCell(ptrs, local, h, with_hessian);
}

int HierarchicalGrid::Refine() {
  if (level_ >= max_level_) {
    throw LevelExhaustedError("grid: already at the finest level R = " +
                              std::to_string(max_level_));
  }
  return ++level_;
}

void HierarchicalGrid::SetLevel(int level) {
  if (level < 0 || level > max_level_) throw InvalidInputError("grid: level out of range");
  level_ = level;
}

std::int64_t HierarchicalGrid::exact_eval_count() const {
  std::shared_lock lock(mu_);
  return static_cast<std::int64_t>(store_.size());
}

GridStats HierarchicalGrid::stats() const {
  std::shared_lock lock(mu_);
  return GridStats{static_cast<std::int64_t>(store_.size()), per_level_, trace_};
}

bool HierarchicalGrid::Contains(const LatticeCoord& c) const {
  const Key key = Canonical(c);
  std::shared_lock lock(mu_);
  return store_.count(key) > 0;
}

std::shared_ptr<const CornerSample> HierarchicalGrid::Find(const LatticeCoord& c) const {
  const Key key = Canonical(c);
  std::shared_lock lock(mu_);
  auto it = store_.find(key);
  return it == store_.end() ? nullptr : it->second.sample;
}

std::vector<std::shared_ptr<const CornerSample>> HierarchicalGrid::Samples() const {
  std::shared_lock lock(mu_);
  std::vector<std::shared_ptr<const CornerSample>> out;
  out.reserve(store_.size());
  for (const auto& [key, entry] : store_) out.push_back(entry.sample);
  return out;
}

std::size_t HierarchicalGrid::size() const {
  std::shared_lock lock(mu_);
  return store_.size();
}

}  // namespace hsid
