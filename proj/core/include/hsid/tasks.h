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

#ifndef HSID_TASKS_H_
#define HSID_TASKS_H_

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsid/bem_swimmer.h"
#include "hsid/fem_arm.h"
#include "hsid/planner.h"
#include "hsid/surrogate.h"

namespace hsid {

enum class Task { kArmCircle, kArmAvoid, kSwimForward };

Task ParseTask(const std::string& tag);  // throws ConfigError
std::string TaskName(Task task);

struct Obstacle {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.0;
};

struct RewardSpec {
  Task task = Task::kArmCircle;
  double tracking_weight = 1.0;
  double control_weight = 1e-3;
  double obstacle_weight = 10.0;
  Eigen::Vector2d circle_center = Eigen::Vector2d(0.0, -0.5);
  double circle_radius = 0.05;
  std::vector<Obstacle> obstacles;
};

// Throws ConfigError on negative weights or malformed geometry.
void ValidateRewardSpec(const RewardSpec& spec);

// Target of state i (1-based) of a K-state plan: one lap of the circle.
Eigen::Vector2d CircleTarget(const RewardSpec& spec, int i, int horizon);

// Latent arm dynamics: state (alpha_i, alpha_{i-1}), control = line tensions.
class ArmPlanningProblem final : public ShootingProblem {
 public:
  ArmPlanningProblem(std::shared_ptr<const ArmModel> model, std::shared_ptr<Surrogate> f,
                     RewardSpec spec, int horizon, double dt, double max_tension);

  int state_dim() const override { return 2 * model_->num_lines(); }
  int control_dim() const override { return model_->num_lines(); }
  int horizon() const override { return horizon_; }
  Eigen::VectorXd InitialState() const override;
  Eigen::VectorXd LowerBound() const override;
  Eigen::VectorXd UpperBound() const override;
  Eigen::VectorXd Step(int i, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       StepJacobians* jac) override;
  double Reward(int i, const Eigen::VectorXd& x, const Eigen::VectorXd* u,
                RewardGradient* grad) override;
  std::int64_t exact_eval_count() const override { return f_->exact_eval_count(); }
  int grid_level() const override { return f_->level(); }

  // Tip position of a planner state.
  Eigen::Vector2d Tip(const Eigen::VectorXd& x);
  // Full state x = f(alpha) of a planner state.
  Eigen::VectorXd FullState(const Eigen::VectorXd& x);
  const ArmModel& model() const { return *model_; }
  Surrogate& surrogate() { return *f_; }
  double dt() const { return dt_; }

 private:
  std::shared_ptr<const ArmModel> model_;
  std::shared_ptr<Surrogate> f_;
  RewardSpec spec_;
  int horizon_;
  double dt_;
  double max_tension_;
};

// Swimmer dynamics on the flattened 12-dim state, control = joint torques.
class SwimmerPlanningProblem final : public ShootingProblem {
 public:
  SwimmerPlanningProblem(std::shared_ptr<const SwimmerModel> model, std::shared_ptr<Surrogate> f,
                         RewardSpec spec, int horizon, double dt);

  int state_dim() const override { return 12; }
  int control_dim() const override { return 3; }
  int horizon() const override { return horizon_; }
  Eigen::VectorXd InitialState() const override;
  Eigen::VectorXd LowerBound() const override;
  Eigen::VectorXd UpperBound() const override;
  Eigen::VectorXd Step(int i, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       StepJacobians* jac) override;
  double Reward(int i, const Eigen::VectorXd& x, const Eigen::VectorXd* u,
                RewardGradient* grad) override;
  std::int64_t exact_eval_count() const override { return f_->exact_eval_count(); }
  int grid_level() const override { return f_->level(); }

  const SwimmerModel& model() const { return *model_; }
  Surrogate& surrogate() { return *f_; }
  double dt() const { return dt_; }

 private:
  std::shared_ptr<const SwimmerModel> model_;
  std::shared_ptr<Surrogate> f_;
  RewardSpec spec_;
  int horizon_;
  double dt_;
};

// Forward reward of one swimmer step: COM advance along +x over dt.
double SwimForwardReward(const SwimmerModel& model, const SwimmerState& s, double dt,
                         Eigen::VectorXd* d_state = nullptr);

}  // namespace hsid

#endif  // HSID_TASKS_H_
