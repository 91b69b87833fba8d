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

#include "hsid/tasks.h"

#include <cmath>
#include <numbers>

#include "hsid/error.h"

namespace hsid {

Task ParseTask(const std::string& tag) {
  if (tag == "arm-circle") return Task::kArmCircle;
  if (tag == "arm-avoid") return Task::kArmAvoid;
  if (tag == "swim-forward") return Task::kSwimForward;
  throw ConfigError("unknown task '" + tag + "'");
}

std::string TaskName(Task task) {
  switch (task) {
    case Task::kArmCircle: return "arm-circle";
    case Task::kArmAvoid: return "arm-avoid";
    case Task::kSwimForward: return "swim-forward";
  }
  return "unknown";
}

void ValidateRewardSpec(const RewardSpec& spec) {
  if (!(spec.tracking_weight >= 0) || !(spec.control_weight >= 0) || !(spec.obstacle_weight >= 0)) {
    throw ConfigError("reward: weights must be non-negative");
  }
  if (!spec.circle_center.allFinite() || !(spec.circle_radius > 0)) {
    throw ConfigError("reward: circle needs a finite centre and positive radius");
  }
  for (const auto& o : spec.obstacles) {
    if (!o.center.allFinite() || !(o.radius > 0)) throw ConfigError("reward: malformed obstacle");
  }
}

Eigen::Vector2d CircleTarget(const RewardSpec& spec, int i, int horizon) {
  const double phase = horizon > 1 ? 2.0 * std::numbers::pi * (i - 1) / (horizon - 1) : 0.0;
  return spec.circle_center + spec.circle_radius * Eigen::Vector2d(std::cos(phase), std::sin(phase));
}

ArmPlanningProblem::ArmPlanningProblem(std::shared_ptr<const ArmModel> model,
                                       std::shared_ptr<Surrogate> f, RewardSpec spec, int horizon,
                                       double dt, double max_tension)
    : model_(std::move(model)), f_(std::move(f)), spec_(std::move(spec)), horizon_(horizon),
      dt_(dt), max_tension_(max_tension) {
  if (!model_ || !f_) throw InvalidInputError("arm problem: null model or surrogate");
  ValidateRewardSpec(spec_);
  if (spec_.task == Task::kSwimForward) throw ConfigError("arm problem: swimmer task");
  if (horizon_ < 1 || !(dt_ > 0) || !(max_tension_ > 0)) {
    throw ConfigError("arm problem: horizon, dt and max tension must be positive");
  }
  if (f_->input_dim() != model_->num_lines() || f_->output_dim() != model_->state_dim()) {
    throw InvalidInputError("arm problem: surrogate does not match the model");
  }
}

Eigen::VectorXd ArmPlanningProblem::InitialState() const { return Eigen::VectorXd::Zero(state_dim()); }
Eigen::VectorXd ArmPlanningProblem::LowerBound() const { return Eigen::VectorXd::Zero(control_dim()); }
Eigen::VectorXd ArmPlanningProblem::UpperBound() const {
  return Eigen::VectorXd::Constant(control_dim(), max_tension_);
}

Eigen::VectorXd ArmPlanningProblem::Step(int, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                         StepJacobians* jac) {
  const int d = control_dim();
  ProjectedStepOptions opts;
  opts.dt = dt_;
  opts.derivatives = jac != nullptr;
  const ProjectedStepResult r =
      ProjectedStep(*model_, LatentState{x.head(d), x.tail(d)}, u, *f_, opts);
  Eigen::VectorXd next(2 * d);
  next << r.alpha, x.head(d);
  if (jac) {
    jac->d_state = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    jac->d_state.topLeftCorner(d, d) = r.d_alpha;
    jac->d_state.topRightCorner(d, d) = r.d_alpha_prev;
    jac->d_state.bottomLeftCorner(d, d).setIdentity();
    jac->d_u = Eigen::MatrixXd::Zero(2 * d, d);
    jac->d_u.topRows(d) = r.d_u;
  }
  return next;
}

Eigen::Vector2d ArmPlanningProblem::Tip(const Eigen::VectorXd& x) {
  return model_->Tip(f_->Query(x.head(control_dim()), false).value);
}

Eigen::VectorXd ArmPlanningProblem::FullState(const Eigen::VectorXd& x) {
  return f_->Query(x.head(control_dim()), false).value;
}

double ArmPlanningProblem::Reward(int i, const Eigen::VectorXd& x, const Eigen::VectorXd* u,
                                  RewardGradient* grad) {
  const int d = control_dim();
  const MapQuery q = f_->Query(x.head(d), false);
  const int dof = model_->tip_dof();
  const Eigen::Vector2d tip = q.value.segment<2>(dof);
  const Eigen::Vector2d err = tip - CircleTarget(spec_, i, horizon_);
  double reward = -spec_.tracking_weight * err.squaredNorm();
  Eigen::Vector2d d_tip = -2.0 * spec_.tracking_weight * err;
  if (spec_.task == Task::kArmAvoid) {
    for (const auto& o : spec_.obstacles) {
      const Eigen::Vector2d off = tip - o.center;
      const double dist = off.norm();
      const double pen = o.radius - dist;
      if (pen <= 0) continue;
      reward -= spec_.obstacle_weight * pen * pen;
      if (dist > 0) d_tip += 2.0 * spec_.obstacle_weight * pen * off / dist;
    }
  }
  if (u) reward -= spec_.control_weight * u->squaredNorm();
  if (grad) {
    grad->d_state = Eigen::VectorXd::Zero(2 * d);
    grad->d_state.head(d) = q.jacobian.middleRows<2>(dof).transpose() * d_tip;
    grad->d_u = u ? Eigen::VectorXd(-2.0 * spec_.control_weight * *u) : Eigen::VectorXd();
  }
  return reward;
}

SwimmerPlanningProblem::SwimmerPlanningProblem(std::shared_ptr<const SwimmerModel> model,
                                               std::shared_ptr<Surrogate> f, RewardSpec spec,
                                               int horizon, double dt)
    : model_(std::move(model)), f_(std::move(f)), spec_(std::move(spec)), horizon_(horizon), dt_(dt) {
  if (!model_ || !f_) throw InvalidInputError("swimmer problem: null model or surrogate");
  ValidateRewardSpec(spec_);
  if (spec_.task != Task::kSwimForward) throw ConfigError("swimmer problem: arm task");
  if (horizon_ < 1 || !(dt_ > 0) || dt_ > model_->config().max_dt) {
    throw ConfigError("swimmer problem: horizon must be positive and dt within (0, max_dt]");
  }
  if (f_->input_dim() != 3 || f_->output_dim() != 6 * model_->num_panels()) {
    throw InvalidInputError("swimmer problem: surrogate does not match the model");
  }
}

Eigen::VectorXd SwimmerPlanningProblem::InitialState() const { return Eigen::VectorXd::Zero(12); }
Eigen::VectorXd SwimmerPlanningProblem::LowerBound() const {
  return Eigen::VectorXd::Constant(3, -model_->config().torque_limit);
}
Eigen::VectorXd SwimmerPlanningProblem::UpperBound() const {
  return Eigen::VectorXd::Constant(3, model_->config().torque_limit);
}

Eigen::VectorXd SwimmerPlanningProblem::Step(int i, const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& u, StepJacobians* jac) {
  SwimmerStepDerivatives d;
  const SwimmerState next = StepSwimmer(*model_, Unflatten(x), u, dt_, *f_, jac ? &d : nullptr, i);
  if (jac) {
    jac->d_state = d.d_state;
    jac->d_u = d.d_u;
  }
  return Flatten(next);
}

double SwimForwardReward(const SwimmerModel& model, const SwimmerState& s, double dt,
                         Eigen::VectorXd* d_state) {
  const double r = dt * model.CenterOfMassVelocity(s)[0];
  if (d_state) {
    // Linear in the velocity; theta and q by central differences.
    d_state->setZero(12);
    const SwimmerVector z = Flatten(s);
    constexpr double kStep = 1e-7;
    for (int c = 2; c < 12; ++c) {
      SwimmerVector zp = z, zm = z;
      zp[c] += kStep;
      zm[c] -= kStep;
      (*d_state)[c] = dt *
                      (model.CenterOfMassVelocity(Unflatten(zp))[0] -
                       model.CenterOfMassVelocity(Unflatten(zm))[0]) /
                      (2 * kStep);
    }
  }
  return r;
}

double SwimmerPlanningProblem::Reward(int, const Eigen::VectorXd& x, const Eigen::VectorXd* u,
                                      RewardGradient* grad) {
  Eigen::VectorXd d_state;
  double reward = spec_.tracking_weight *
                  SwimForwardReward(*model_, Unflatten(x), dt_, grad ? &d_state : nullptr);
  if (u) reward -= spec_.control_weight * u->squaredNorm();
  if (grad) {
    grad->d_state = spec_.tracking_weight * d_state;
    grad->d_u = u ? Eigen::VectorXd(-2.0 * spec_.control_weight * *u) : Eigen::VectorXd();
  }
  return reward;
}

}  // namespace hsid
