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

#ifndef HSID_HIERARCHICAL_GRID_H_
#define HSID_HIERARCHICAL_GRID_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hsid/surrogate.h"

namespace hsid {

// A lattice point at refinement level `level`: world position is
// index * base_cell / 2^level componentwise.
struct LatticeCoord {
  int level = 0;
  std::vector<std::int64_t> index;

  friend bool operator==(const LatticeCoord&, const LatticeCoord&) = default;
};

// Memoized exact evaluation of the backing map at a lattice point.
struct CornerSample : MapSample {
  Eigen::VectorXd position;
};

struct GridStats {
  std::int64_t exact_eval_count = 0;
  // Samples first created while the grid was at each level.
  std::vector<std::int64_t> per_level;
  // (queries answered so far, cumulative exact evaluations), appended
  // whenever a query triggered new evaluations.
  std::vector<std::pair<std::int64_t, std::int64_t>> eval_trace;
};

// Smallest R >= 0 with base_cell / 2^R <= threshold, i.e. ceil(log2(dx/eta)).
int MaxRefinements(double base_cell, double threshold);

// Lazily built uniform lattice family with cell size base_cell / 2^level.
// Samples are keyed on the finest lattice (level R), so a corner computed at
// a coarse level is reused by every finer level where positions coincide.
// The domain is unbounded.
//
// Thread safety: Interpolate and EnsureCorners may be called concurrently.
// Refine/SetLevel must not race with queries.
class HierarchicalGrid final : public Surrogate {
 public:
  HierarchicalGrid(std::shared_ptr<const ExpensiveMap> map, double base_cell,
                   double threshold);

  int input_dim() const override { return dim_; }
  int output_dim() const override { return out_dim_; }
  int level() const override { return level_; }
  int max_level() const { return max_level_; }
  double base_cell() const { return base_cell_; }
  double threshold() const { return threshold_; }
  double cell_size() const { return CellSize(level_); }
  double CellSize(int level) const;

  // Corners of the half-open cell containing x, ordered by bitmask (bit k
  // set = upper end in dimension k). On-lattice coordinates floor.
  std::vector<LatticeCoord> LocateCell(const Eigen::VectorXd& x, int level) const;
  std::vector<LatticeCoord> LocateCell(const Eigen::VectorXd& x) const {
    return LocateCell(x, level_);
  }

  Eigen::VectorXd Position(const LatticeCoord& c) const;

  // Evaluates every missing corner; returns the number of backing-map calls.
  int EnsureCorners(std::span<const LatticeCoord> cell);

  MapQuery Interpolate(const Eigen::VectorXd& x, bool with_hessian = false);
  // Interpolates using the cell with lower corner `lower` at the current
  // level, even if x lies outside it (evaluates the cubic patch there).
  MapQuery InterpolateInCell(const Eigen::VectorXd& x,
                             const std::vector<std::int64_t>& lower,
                             bool with_hessian = false);

  MapQuery Query(const Eigen::VectorXd& x, bool with_hessian) override {
    return Interpolate(x, with_hessian);
  }

  int Refine();
  // Jumps to any level in [0, R].
  void SetLevel(int level);

  std::int64_t exact_eval_count() const override;
  GridStats stats() const;

  bool Contains(const LatticeCoord& c) const;
  std::shared_ptr<const CornerSample> Find(const LatticeCoord& c) const;
  std::vector<std::shared_ptr<const CornerSample>> Samples() const;
  std::size_t size() const;

  // Binary persistence, see grid_io.cc for the layout.
  void Save(std::ostream& out) const;
  static std::unique_ptr<HierarchicalGrid> Load(
      std::istream& in, std::shared_ptr<const ExpensiveMap> map);

 private:
  using Key = std::vector<std::int64_t>;
  struct Entry {
    std::shared_ptr<const CornerSample> sample;
    int level;
  };

  Key Canonical(const LatticeCoord& c) const;
  Eigen::VectorXd KeyPosition(const Key& key) const;
  void Insert(const Key& key, std::shared_ptr<const CornerSample> sample, int level);

  std::shared_ptr<const ExpensiveMap> map_;
  int dim_;
  int out_dim_;
  double base_cell_;
  double threshold_;
  int max_level_;
  int level_ = 0;

  mutable std::shared_mutex mu_;
  std::map<Key, Entry> store_;
  std::int64_t queries_ = 0;
  std::vector<std::int64_t> per_level_;
  std::vector<std::pair<std::int64_t, std::int64_t>> trace_;
};

}  // namespace hsid

#endif  // HSID_HIERARCHICAL_GRID_H_
