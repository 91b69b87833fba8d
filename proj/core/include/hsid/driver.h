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

#ifndef HSID_DRIVER_H_
#define HSID_DRIVER_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsid/hierarchical_grid.h"
#include "hsid/planner.h"
#include "hsid/rl_control.h"

namespace hsid {

// Levels 0..R of a grid with R = MaxRefinements(base_cell, threshold).
struct RefinementSchedule {
  double base_cell = 0.0;
  double threshold = 0.0;
  int max_refinements = 0;

  static RefinementSchedule For(double base_cell, double threshold);
  static RefinementSchedule Of(const HierarchicalGrid& grid);
  int executions() const { return max_refinements + 1; }
};

// One solver execution at a fixed grid level (-1 for exact mode).
struct LevelRecord {
  int level = -1;
  int iterations = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  std::int64_t exact_evals_before = 0;
  std::int64_t exact_evals_after = 0;
  // Max-norm change of the solution against the previous execution; NaN for
  // the first one.
  double drift = 0.0;
  bool failed = false;
  std::string error;
};

// Row of the per-iteration history, shared by planning and training.
struct IterationRow {
  int iteration = 0;
  std::int64_t cumulative_exact_evals = 0;
  double objective = 0.0;
  int grid_level = -1;
};

struct PlanRun {
  MotionPlan plan;                   // best solution of the last good execution
  std::vector<IterationRow> history;
  std::vector<LevelRecord> levels;
  std::vector<ControlSequence> snapshots;  // solution after each execution
  std::int64_t steps_simulated = 0;        // dynamics steps over all rollouts
  bool failed = false;
};

// Runs the planner once per level r = 0..R of `grid`, each execution warm
// started from the previous one. With `grid` null the problem runs in exact
// mode for `exact_executions` executions of the same per-execution budget.
// Execution r may run up to round(options.max_iters * budget_growth^r)
// iterations. A failing execution stops the loop and the last good plan is
// returned with `failed` set; a failure of the very first execution throws.
PlanRun RunPlanning(ShootingProblem& problem, HierarchicalGrid* grid, const ControlSequence& initial,
                    const PlannerOptions& options, int exact_executions = 1, double budget_growth = 1.0);

struct TrainOptions {
  int iterations = 50;        // policy updates over the whole run
  double budget_growth = 1.0;  // level r receives a share proportional to growth^r
  PpoOptions ppo;
};

struct TrainRun {
  Policy policy;
  ValueFunction value;
  std::vector<TrainRecord> history;  // record i: returns after i updates
  std::vector<LevelRecord> levels;
  std::int64_t steps_simulated = 0;  // environment steps over all batches
  bool failed = false;
};

// Interleaves policy updates with grid refinement: the update budget is split
// over levels 0..R by SplitIterations. `grid` may be null for
// exact-mode training. Deterministic in `seed`.
TrainRun RunTraining(Environment& env, HierarchicalGrid* grid, Policy policy, ValueFunction value,
                     const TrainOptions& options, std::uint64_t seed);

// Splits `total` iterations over `executions` levels in proportion to
// growth^r, rounding down, with the remainder going to the last level.
std::vector<int> SplitIterations(int total, int executions, double growth = 1.0);

// Derives a per-iteration stream seed.
std::uint64_t StreamSeed(std::uint64_t seed, std::uint64_t stream);

}  // namespace hsid

#endif  // HSID_DRIVER_H_
