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

#include "hsid/driver.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hsid/error.h"

namespace hsid {
namespace {

double ControlDrift(const ControlSequence& a, const ControlSequence& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return d;
}

// Forwards to a problem and counts simulated steps.
class CountingProblem final : public ShootingProblem {
 public:
  explicit CountingProblem(ShootingProblem& inner) : inner_(inner) {}
  int state_dim() const override { return inner_.state_dim(); }
  int control_dim() const override { return inner_.control_dim(); }
  int horizon() const override { return inner_.horizon(); }
  Eigen::VectorXd InitialState() const override { return inner_.InitialState(); }
  Eigen::VectorXd LowerBound() const override { return inner_.LowerBound(); }
  Eigen::VectorXd UpperBound() const override { return inner_.UpperBound(); }
  Eigen::VectorXd Step(int i, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       StepJacobians* jac) override {
    ++steps_;
    return inner_.Step(i, x, u, jac);
  }
  double Reward(int i, const Eigen::VectorXd& x, const Eigen::VectorXd* u,
                RewardGradient* grad) override {
    return inner_.Reward(i, x, u, grad);
  }
  std::int64_t exact_eval_count() const override { return inner_.exact_eval_count(); }
  int grid_level() const override { return inner_.grid_level(); }
  std::int64_t steps() const { return steps_; }

 private:
  ShootingProblem& inner_;
  std::int64_t steps_ = 0;
};

Eigen::VectorXd PolicyParams(const Policy& p) {
  Eigen::VectorXd w(p.mean.num_params() + p.log_std.size());
  w << p.mean.Params(), p.log_std;
  return w;
}

}  // namespace

RefinementSchedule RefinementSchedule::For(double base_cell, double threshold) {
  return RefinementSchedule{base_cell, threshold, MaxRefinements(base_cell, threshold)};
}

RefinementSchedule RefinementSchedule::Of(const HierarchicalGrid& grid) {
  return RefinementSchedule{grid.base_cell(), grid.threshold(), grid.max_level()};
}

std::vector<int> SplitIterations(int total, int executions, double growth) {
  if (total < 0 || executions < 1 || !(growth > 0)) throw InvalidInputError("split: invalid iteration budget");
  double weight_sum = 0.0;
  for (int r = 0; r < executions; ++r) weight_sum += std::pow(growth, r);
  std::vector<int> split(executions);
  int assigned = 0;
  for (int r = 0; r + 1 < executions; ++r) {
    split[r] = static_cast<int>(total * std::pow(growth, r) / weight_sum);
    assigned += split[r];
  }
  split.back() = total - assigned;
  return split;
}

std::uint64_t StreamSeed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the pair.
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + stream + 0x632BE59BD9B4E019ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

PlanRun RunPlanning(ShootingProblem& problem, HierarchicalGrid* grid, const ControlSequence& initial,
                    const PlannerOptions& options, int exact_executions, double budget_growth) {
  if (!(budget_growth > 0)) throw InvalidInputError("driver: budget growth must be positive");
  CountingProblem counted(problem);
  const int executions = grid ? grid->max_level() + 1 : exact_executions;
  if (executions < 1) throw InvalidInputError("driver: need at least one execution");
  PlanRun run;
  ControlSequence warm = initial;
  int iteration_offset = 0;
  for (int r = 0; r < executions; ++r) {
    if (grid) grid->SetLevel(r);
    LevelRecord rec;
    rec.level = grid ? r : -1;
    rec.exact_evals_before = problem.exact_eval_count();
    MotionPlan plan;
    try {
      PlannerOptions level_options = options;
      level_options.max_iters = static_cast<int>(std::lround(options.max_iters * std::pow(budget_growth, r)));
      plan = Optimize(counted, warm, level_options);
      run.steps_simulated = counted.steps();
    } catch (const Error& e) {
      if (r == 0) throw;
      run.steps_simulated = counted.steps();
      rec.failed = true;
      rec.error = e.what();
      rec.exact_evals_after = problem.exact_eval_count();
      rec.drift = std::numeric_limits<double>::quiet_NaN();
      run.levels.push_back(rec);
      run.failed = true;
      break;
    }
    rec.exact_evals_after = problem.exact_eval_count();
    rec.iterations = static_cast<int>(plan.history.size()) - 1;
    rec.initial_objective = plan.history.front().reward;
    rec.final_objective = plan.total_reward;
    rec.drift = r == 0 ? std::numeric_limits<double>::quiet_NaN()
                       : ControlDrift(plan.controls, run.snapshots.back());
    for (std::size_t k = r == 0 ? 0 : 1; k < plan.history.size(); ++k) {
      const PlannerRecord& h = plan.history[k];
      run.history.push_back(
          IterationRow{iteration_offset + h.iteration, h.cumulative_exact_evals, h.reward, h.grid_level});
    }
    iteration_offset += rec.iterations;
    run.levels.push_back(rec);
    run.snapshots.push_back(plan.controls);
    warm = plan.controls;
    run.plan = std::move(plan);
  }
  return run;
}

TrainRun RunTraining(Environment& env, HierarchicalGrid* grid, Policy policy, ValueFunction value,
                     const TrainOptions& options, std::uint64_t seed) {
  const int executions = grid ? grid->max_level() + 1 : 1;
  const std::vector<int> split = SplitIterations(options.iterations, executions, options.budget_growth);
  PpoTrainer trainer(std::move(policy), std::move(value), options.ppo, StreamSeed(seed, 0));
  TrainRun run;
  run.policy = trainer.policy();
  run.value = trainer.value();
  Eigen::VectorXd previous = PolicyParams(trainer.policy());
  int iteration = 0;
  auto record = [&](const RolloutBatch& batch) {
    TrainRecord r;
    r.iteration = iteration;
    const auto& er = batch.episode_returns;
    if (!er.empty()) {
      double sum = 0.0, sq = 0.0;
      for (double v : er) sum += v;
      r.mean_return = sum / er.size();
      for (double v : er) sq += (v - r.mean_return) * (v - r.mean_return);
      r.return_stderr = er.size() > 1 ? std::sqrt(sq / (er.size() - 1) / er.size()) : 0.0;
    }
    r.cumulative_exact_evals = env.exact_eval_count();
    r.policy_entropy = trainer.policy().Entropy();
    r.grid_level = env.grid_level();
    run.history.push_back(r);
  };
  for (int r = 0; r < executions; ++r) {
    if (grid) grid->SetLevel(r);
    LevelRecord rec;
    rec.level = grid ? r : -1;
    rec.exact_evals_before = env.exact_eval_count();
    // A level may receive no updates when the budget is small.
    rec.initial_objective = std::numeric_limits<double>::quiet_NaN();
    try {
      for (int k = 0; k < split[r]; ++k) {
        RolloutBatch batch =
            Collect(trainer.policy(), trainer.value(), env, options.ppo.batch_size, StreamSeed(seed, iteration + 1));
        run.steps_simulated += batch.size();
        record(batch);
        if (k == 0) rec.initial_objective = run.history.back().mean_return;
        trainer.Update(batch);
        ++iteration;
        ++rec.iterations;
      }
      if (r + 1 == executions) {
        // Returns of the final policy.
        RolloutBatch batch =
            Collect(trainer.policy(), trainer.value(), env, options.ppo.batch_size, StreamSeed(seed, iteration + 1));
        run.steps_simulated += batch.size();
        record(batch);
      }
    } catch (const Error& e) {
      rec.failed = true;
      rec.error = e.what();
      rec.exact_evals_after = env.exact_eval_count();
      rec.drift = std::numeric_limits<double>::quiet_NaN();
      run.levels.push_back(rec);
      run.failed = true;
      return run;
    }
    rec.exact_evals_after = env.exact_eval_count();
    rec.final_objective =
        run.history.empty() ? std::numeric_limits<double>::quiet_NaN() : run.history.back().mean_return;
    const Eigen::VectorXd w = PolicyParams(trainer.policy());
    rec.drift = r == 0 ? std::numeric_limits<double>::quiet_NaN() : (w - previous).cwiseAbs().maxCoeff();
    previous = w;
    run.levels.push_back(rec);
    run.policy = trainer.policy();
    run.value = trainer.value();
  }
  return run;
}

}  // namespace hsid
