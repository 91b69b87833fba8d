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

#ifndef HSID_PLANNER_H_
#define HSID_PLANNER_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hsid {

struct StepJacobians {
  Eigen::MatrixXd d_state;  // n x n
  Eigen::MatrixXd d_u;      // n x d
};

struct RewardGradient {
  Eigen::VectorXd d_state;
  Eigen::VectorXd d_u;  // empty for the terminal reward
};

// Discrete-time problem x_{i+1} = g(i, x_i, u_i) for i = 1..K-1 with total
// reward sum_i R(i, x_i, u_i) + R(K, x_K). Indices are 1-based as in the
// plan; controls u_1..u_{K-1}.
class ShootingProblem {
 public:
  virtual ~ShootingProblem() = default;

  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual int horizon() const = 0;
  virtual Eigen::VectorXd InitialState() const = 0;
  virtual Eigen::VectorXd LowerBound() const = 0;
  virtual Eigen::VectorXd UpperBound() const = 0;

  // Throws hsid::Error on step failure.
  virtual Eigen::VectorXd Step(int i, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                               StepJacobians* jac) = 0;
  // u is null for the terminal state.
  virtual double Reward(int i, const Eigen::VectorXd& x, const Eigen::VectorXd* u,
                        RewardGradient* grad) = 0;

  // Cumulative exact evaluations of the expensive map behind the dynamics.
  virtual std::int64_t exact_eval_count() const { return 0; }
  virtual int grid_level() const { return -1; }
};

using ControlSequence = std::vector<Eigen::VectorXd>;

struct RolloutResult {
  std::vector<Eigen::VectorXd> states;  // x_1..x_K (fewer on failure)
  std::vector<double> rewards;          // per state
  double total_reward = 0.0;
  std::int64_t exact_evals = 0;  // evaluations spent by this rollout
  bool ok = true;
  std::string error;
  ControlSequence gradient;  // d total / d u_i, filled on request
};

// Simulates the controls. On step failure the rollout stops, ok is false and
// the partial trace is kept.
RolloutResult Rollout(ShootingProblem& problem, const ControlSequence& controls,
                      bool with_gradient = false);

struct PlannerOptions {
  int max_iters = 50;
  int memory = 8;
  double grad_tol = 1e-6;
  double reward_tol = 1e-9;
  double initial_step = 0.1;  // first move, as a max-norm step in control units
  int max_backtracks = 30;
  double armijo = 1e-4;
};

struct PlannerRecord {
  int iteration = 0;
  double reward = 0.0;
  double grad_norm = 0.0;
  std::int64_t cumulative_exact_evals = 0;
  int grid_level = -1;
};

struct MotionPlan {
  ControlSequence controls;
  std::vector<Eigen::VectorXd> states;
  std::vector<double> rewards;
  double total_reward = 0.0;
  std::vector<PlannerRecord> history;  // iteration 0 is the initial plan
  std::string termination;
};

// Projected limited-memory quasi-Newton ascent on the total reward. Accepted
// iterates never decrease the reward. Throws the rollout error if the initial
// plan cannot be simulated.
MotionPlan Optimize(ShootingProblem& problem, const ControlSequence& initial,
                    const PlannerOptions& options = {},
                    const std::function<void(const PlannerRecord&)>& on_iteration = {});

ControlSequence ProjectControls(const ShootingProblem& problem, const ControlSequence& controls);

}  // namespace hsid

#endif  // HSID_PLANNER_H_
