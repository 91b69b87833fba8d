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

#include "hsid/planner.h"

#include <cmath>
#include <deque>
#include <limits>

#include "hsid/error.h"

namespace hsid {
namespace {

Eigen::VectorXd Flatten(const ControlSequence& u, int d) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(u.size()) * d);
  for (std::size_t i = 0; i < u.size(); ++i) z.segment(i * d, d) = u[i];
  return z;
}

ControlSequence Split(const Eigen::VectorXd& z, int d) {
  ControlSequence u(z.size() / d);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = z.segment(i * d, d);
  return u;
}

struct Evaluation {
  RolloutResult rollout;
  Eigen::VectorXd z;
  Eigen::VectorXd grad;  // of the reward
  double reward = -std::numeric_limits<double>::infinity();
};

}  // namespace

ControlSequence ProjectControls(const ShootingProblem& problem, const ControlSequence& controls) {
  const Eigen::VectorXd lo = problem.LowerBound(), hi = problem.UpperBound();
  ControlSequence out = controls;
  for (auto& u : out) u = u.cwiseMax(lo).cwiseMin(hi);
  return out;
}

RolloutResult Rollout(ShootingProblem& problem, const ControlSequence& controls, bool with_gradient) {
  const int K = problem.horizon();
  const int d = problem.control_dim();
  if (K < 1) throw InvalidInputError("rollout: horizon must be at least 1");
  if (static_cast<int>(controls.size()) != K - 1) {
    throw InvalidInputError("rollout: expected K - 1 controls");
  }
  for (const auto& u : controls) {
    if (u.size() != d || !u.allFinite()) throw InvalidInputError("rollout: malformed control");
  }
  RolloutResult r;
  const std::int64_t evals0 = problem.exact_eval_count();
  std::vector<StepJacobians> jac(with_gradient ? K - 1 : 0);
  std::vector<RewardGradient> rg(with_gradient ? K : 0);
  Eigen::VectorXd x = problem.InitialState();
  r.states.push_back(x);
  try {
    for (int i = 1; i < K; ++i) {
      const double ri = problem.Reward(i, x, &controls[i - 1], with_gradient ? &rg[i - 1] : nullptr);
      r.rewards.push_back(ri);
      r.total_reward += ri;
      x = problem.Step(i, x, controls[i - 1], with_gradient ? &jac[i - 1] : nullptr);
      r.states.push_back(x);
    }
    const double rK = problem.Reward(K, x, nullptr, with_gradient ? &rg[K - 1] : nullptr);
    r.rewards.push_back(rK);
    r.total_reward += rK;
  } catch (const Error& e) {
    r.ok = false;
    r.error = e.what();
    r.total_reward = -std::numeric_limits<double>::infinity();
  }
  r.exact_evals = problem.exact_eval_count() - evals0;
  if (!with_gradient || !r.ok) return r;

  // Reverse sweep: lambda_i = dR_i/dx_i + (dx_{i+1}/dx_i)^T lambda_{i+1}.
  r.gradient.assign(K - 1, Eigen::VectorXd());
  Eigen::VectorXd lambda = rg[K - 1].d_state;
  for (int i = K - 1; i >= 1; --i) {
    r.gradient[i - 1] = rg[i - 1].d_u + jac[i - 1].d_u.transpose() * lambda;
    lambda = rg[i - 1].d_state + jac[i - 1].d_state.transpose() * lambda;
  }
  return r;
}

MotionPlan Optimize(ShootingProblem& problem, const ControlSequence& initial,
                    const PlannerOptions& options,
                    const std::function<void(const PlannerRecord&)>& on_iteration) {
  const int d = problem.control_dim();
  const int K = problem.horizon();
  Eigen::VectorXd lo(static_cast<Eigen::Index>(K - 1) * d), hi(lo.size());
  for (int i = 0; i + 1 < K; ++i) {
    lo.segment(i * d, d) = problem.LowerBound();
    hi.segment(i * d, d) = problem.UpperBound();
  }
  auto project = [&](const Eigen::VectorXd& z) { return Eigen::VectorXd(z.cwiseMax(lo).cwiseMin(hi)); };
  auto evaluate = [&](const Eigen::VectorXd& z) {
    Evaluation e;
    e.z = z;
    e.rollout = Rollout(problem, Split(z, d), true);
    if (e.rollout.ok && std::isfinite(e.rollout.total_reward)) {
      e.reward = e.rollout.total_reward;
      e.grad = Flatten(e.rollout.gradient, d);
      if (!e.grad.allFinite()) e.reward = -std::numeric_limits<double>::infinity();
    }
    return e;
  };
  auto projected_grad_norm = [&](const Evaluation& e) {
    return e.grad.size() ? (project(e.z + e.grad) - e.z).cwiseAbs().maxCoeff() : 0.0;
  };

  Evaluation cur = evaluate(project(Flatten(initial, d)));
  if (!cur.rollout.ok) throw SolverError("planner: initial plan failed: " + cur.rollout.error, {}, 0.0);

  MotionPlan plan;
  auto record = [&](int iteration) {
    PlannerRecord rec;
    rec.iteration = iteration;
    rec.reward = cur.reward;
    rec.grad_norm = projected_grad_norm(cur);
    rec.cumulative_exact_evals = problem.exact_eval_count();
    rec.grid_level = problem.grid_level();
    plan.history.push_back(rec);
    if (on_iteration) on_iteration(rec);
    return rec;
  };
  record(0);
  plan.termination = "max_iters";

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;  // (s, y) for -reward
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    if (cur.grad.size() == 0 || projected_grad_norm(cur) < options.grad_tol) {
      plan.termination = "grad_tol";
      break;
    }
    const Eigen::VectorXd g = -cur.grad;
    // Variables pinned at a bound by the gradient stay fixed this iteration.
    Eigen::VectorXd free = Eigen::VectorXd::Ones(g.size());
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      if ((cur.z[k] <= lo[k] && g[k] > 0) || (cur.z[k] >= hi[k] && g[k] < 0)) free[k] = 0.0;
    }
    const Eigen::VectorXd gf = g.cwiseProduct(free);
    auto steepest = [&] {
      const double gmax = gf.cwiseAbs().maxCoeff();
      return Eigen::VectorXd(-gf * (options.initial_step / gmax));
    };
    Eigen::VectorXd dir;
    if (memory.empty()) {
      dir = steepest();
    } else {
      Eigen::VectorXd q = gf;
      std::vector<double> alpha(memory.size());
      for (int m = static_cast<int>(memory.size()) - 1; m >= 0; --m) {
        const auto& [s, y] = memory[m];
        alpha[m] = s.dot(q) / y.dot(s);
        q -= alpha[m] * y;
      }
      const auto& [s_last, y_last] = memory.back();
      q *= s_last.dot(y_last) / y_last.dot(y_last);
      for (std::size_t m = 0; m < memory.size(); ++m) {
        const auto& [s, y] = memory[m];
        const double beta = y.dot(q) / y.dot(s);
        q += (alpha[m] - beta) * s;
      }
      dir = -q.cwiseProduct(free);
      if (!(dir.dot(gf) < 0)) {
        memory.clear();
        dir = steepest();
      }
    }

    auto line_search = [&](const Eigen::VectorXd& direction, Evaluation* out) {
      double t = 1.0;
      for (int bt = 0; bt <= options.max_backtracks; ++bt, t *= 0.5) {
        const Eigen::VectorXd z = project(cur.z + t * direction);
        if ((z - cur.z).cwiseAbs().maxCoeff() == 0.0) return false;
        Evaluation trial = evaluate(z);
        if (trial.reward >= cur.reward - options.armijo * g.dot(z - cur.z) &&
            trial.reward >= cur.reward) {
          *out = std::move(trial);
          return true;
        }
      }
      return false;
    };
    Evaluation next;
    bool accepted = line_search(dir, &next);
    if (!accepted && !memory.empty()) {
      memory.clear();
      accepted = line_search(steepest(), &next);
    }
    if (!accepted) {
      plan.termination = "line_search";
      break;
    }
    const Eigen::VectorXd s = next.z - cur.z;
    const Eigen::VectorXd y = -next.grad + cur.grad;
    const double change = next.reward - cur.reward;
    cur = std::move(next);
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      memory.emplace_back(s, y);
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }
    record(iter);
    if (std::abs(change) < options.reward_tol) {
      plan.termination = "reward_tol";
      break;
    }
  }
  plan.controls = Split(cur.z, d);
  plan.states = cur.rollout.states;
  plan.rewards = cur.rollout.rewards;
  plan.total_reward = cur.reward;
  return plan;
}

}  // namespace hsid
