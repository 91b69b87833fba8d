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

#include "hsid/bench.h"

#include <chrono>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "hsid/error.h"
#include "hsid/hierarchical_grid.h"

namespace hsid {
namespace {

double Elapsed(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::shared_ptr<Surrogate> MakeSurrogate(std::shared_ptr<const ExpensiveMap> map, const GridSettings& grid,
                                         bool exact, std::shared_ptr<HierarchicalGrid>* grid_out) {
  if (exact) return std::make_shared<ExactBypass>(std::move(map));
  auto g = std::make_shared<HierarchicalGrid>(std::move(map), grid.base_cell, grid.threshold);
  *grid_out = g;
  return g;
}

void FillPlanSummary(const PlanRun& run, const ShootingProblem& problem, const HierarchicalGrid* grid,
                     RunSummary& s) {
  s.iterations = run.history.empty() ? 0 : run.history.back().iteration;
  s.initial_objective = run.history.empty() ? 0.0 : run.history.front().objective;
  s.final_objective = run.plan.total_reward;
  s.failed = run.failed;
  s.termination = run.plan.termination;
  s.exact_evals = problem.exact_eval_count();
  s.steps_simulated = run.steps_simulated;
  s.corner_count = grid ? grid->stats().exact_eval_count : 0;
  s.eval_reduction = s.exact_evals > 0 ? static_cast<double>(s.steps_simulated) / s.exact_evals : 0.0;
  s.levels = run.levels;
}

void FillTiming(const ErrorMeasurement& m, double t_f, RunSummary& s) {
  s.relative_error = m.mean_relative_error;
  s.max_relative_error = m.max_relative_error;
  s.t_f = t_f;
  s.t_g = m.exact_step_seconds;
  s.t_g_approx = m.approx_step_seconds;
  const double avoided = std::max<std::int64_t>(0, s.steps_simulated - s.exact_evals);
  s.estimated_no_surrogate_seconds = s.exact_mode ? s.run_seconds : avoided * t_f;
}

// Up to `count` distinct map inputs from the samples.
std::vector<Eigen::VectorXd> TimingInputs(const std::vector<Eigen::VectorXd>& inputs, int count) {
  std::vector<Eigen::VectorXd> out;
  for (std::size_t i = 0; i < inputs.size() && static_cast<int>(out.size()) < count;
       i += std::max<std::size_t>(1, inputs.size() / count)) {
    out.push_back(inputs[i]);
  }
  return out;
}

}  // namespace

BenchOutput RunArmPlanBench(const Config& config, bool exact, const std::string& base_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  auto model = std::make_shared<ArmModel>(BuildArmMesh(config.arm, base_dir), config.arm.model);
  auto map = std::make_shared<ArmQuasistaticMap>(model);
  std::shared_ptr<HierarchicalGrid> grid;
  auto f = MakeSurrogate(map, config.arm.grid, exact, &grid);
  ArmPlanningProblem problem(model, f, config.arm.reward, config.arm.horizon, config.arm.dt,
                             config.arm.max_tension);
  const ControlSequence initial(config.arm.horizon - 1,
                                Eigen::VectorXd::Constant(model->num_lines(), config.arm.initial_control));
  const int executions = RefinementSchedule::For(config.arm.grid.base_cell, config.arm.grid.threshold).executions();
  const PlanRun run = RunPlanning(problem, grid.get(), initial, config.planner, executions, config.planner_budget_growth);

  BenchOutput out;
  RunSummary& s = out.summary;
  s.command = "plan-arm";
  s.task = TaskName(config.arm.reward.task);
  s.exact_mode = exact;
  s.seed = config.seed;
  s.state_dim = model->state_dim();
  s.control_dim = model->num_lines();
  FillPlanSummary(run, problem, grid.get(), s);
  s.run_seconds = Elapsed(t0);

  // Error of one step from states along the final plan; the reference uses
  // its own exact evaluator so the run's counters stay untouched.
  const std::vector<Eigen::VectorXd> states(run.plan.states.begin(), run.plan.states.end() - 1);
  const auto samples = SampleTrajectory(states, run.plan.controls, config.error_samples);
  ExactBypass fresh(std::make_shared<ArmQuasistaticMap>(model));
  Surrogate& reference = exact ? *f : fresh;
  const ErrorMeasurement m = MeasureRelativeError(samples, ArmStepFunction(*model, reference, config.arm.dt),
                                                  ArmStepFunction(*model, *f, config.arm.dt));
  std::vector<Eigen::VectorXd> alphas;
  for (const auto& x : states) alphas.push_back(x.head(model->num_lines()));
  FillTiming(m, TimeMapEvaluation(ArmQuasistaticMap(model), TimingInputs(alphas, 5)), s);
  out.history = run.history;
  out.controls = run.plan.controls;
  return out;
}

ControlSequence SwimmerInitialPlan(const SwimmerSettings& settings) {
  ControlSequence u(settings.horizon - 1, Eigen::VectorXd::Zero(3));
  for (int i = 0; i < settings.horizon - 1; ++i) {
    const double t = i * settings.dt;
    for (int j = 0; j < 3; ++j) {
      u[i][j] = settings.initial_amplitude *
                std::sin(2.0 * std::numbers::pi * settings.initial_frequency * t + j * std::numbers::pi / 2);
    }
  }
  return u;
}

BenchOutput RunSwimmerPlanBench(const Config& config, bool exact) {
  const auto t0 = std::chrono::steady_clock::now();
  auto model = std::make_shared<SwimmerModel>(config.swimmer.model);
  auto map = std::make_shared<SwimmerFluidMap>(model);
  std::shared_ptr<HierarchicalGrid> grid;
  auto f = MakeSurrogate(map, config.swimmer.grid, exact, &grid);
  SwimmerPlanningProblem problem(model, f, config.swimmer.reward, config.swimmer.horizon, config.swimmer.dt);
  const int executions =
      RefinementSchedule::For(config.swimmer.grid.base_cell, config.swimmer.grid.threshold).executions();
  const PlanRun run =
      RunPlanning(problem, grid.get(), SwimmerInitialPlan(config.swimmer), config.planner, executions,
                  config.planner_budget_growth);

  BenchOutput out;
  RunSummary& s = out.summary;
  s.command = "plan-swimmer";
  s.task = TaskName(config.swimmer.reward.task);
  s.exact_mode = exact;
  s.seed = config.seed;
  s.state_dim = map->output_dim();
  s.control_dim = map->input_dim();
  FillPlanSummary(run, problem, grid.get(), s);
  s.run_seconds = Elapsed(t0);

  const std::vector<Eigen::VectorXd> states(run.plan.states.begin(), run.plan.states.end() - 1);
  const auto samples = SampleTrajectory(states, run.plan.controls, config.error_samples);
  ExactBypass fresh(map);
  Surrogate& reference = exact ? *f : fresh;
  const ErrorMeasurement m =
      MeasureRelativeError(samples, SwimmerStepFunction(*model, reference, config.swimmer.dt),
                           SwimmerStepFunction(*model, *f, config.swimmer.dt));
  std::vector<Eigen::VectorXd> qs;
  for (const auto& x : states) qs.push_back(Unflatten(x).q);
  FillTiming(m, TimeMapEvaluation(*map, TimingInputs(qs, 5)), s);
  out.history = run.history;
  out.controls = run.plan.controls;
  return out;
}

BenchOutput RunSwimmerTrainBench(const Config& config, bool exact) {
  const auto t0 = std::chrono::steady_clock::now();
  auto model = std::make_shared<SwimmerModel>(config.swimmer.model);
  auto map = std::make_shared<SwimmerFluidMap>(model);
  std::shared_ptr<HierarchicalGrid> grid;
  auto f = MakeSurrogate(map, config.swimmer.grid, exact, &grid);
  SwimmerEnv env(model, f, config.swimmer.reward, config.rl.env);
  const Eigen::VectorXd bound = Eigen::VectorXd::Constant(3, config.swimmer.model.torque_limit);
  Policy policy = MakePolicy(env.obs_dim(), bound, StreamSeed(config.seed, 1), config.rl.hidden,
                             config.rl.init_std_fraction);
  ValueFunction value = MakeValueFunction(env.obs_dim(), StreamSeed(config.seed, 2), config.rl.hidden);
  const TrainRun run = RunTraining(env, grid.get(), std::move(policy), std::move(value), config.rl.train,
                                   StreamSeed(config.seed, 3));

  BenchOutput out;
  RunSummary& s = out.summary;
  s.command = "train-swimmer";
  s.task = TaskName(config.swimmer.reward.task);
  s.exact_mode = exact;
  s.seed = config.seed;
  s.state_dim = map->output_dim();
  s.control_dim = map->input_dim();
  s.iterations = run.history.empty() ? 0 : run.history.back().iteration;
  s.initial_objective = run.history.empty() ? 0.0 : run.history.front().mean_return;
  s.final_objective = run.history.empty() ? 0.0 : run.history.back().mean_return;
  s.failed = run.failed;
  s.termination = run.failed ? "level failure" : "iteration budget";
  s.exact_evals = env.exact_eval_count();
  s.steps_simulated = run.steps_simulated;
  s.corner_count = grid ? grid->stats().exact_eval_count : 0;
  s.eval_reduction = s.exact_evals > 0 ? static_cast<double>(s.steps_simulated) / s.exact_evals : 0.0;
  s.levels = run.levels;
  s.run_seconds = Elapsed(t0);

  // States visited by the final policy's mean action.
  std::vector<Eigen::VectorXd> states, controls;
  {
    SwimmerEnvOptions opts = config.rl.env;
    SwimmerEnv probe(model, f, config.swimmer.reward, opts);
    std::mt19937_64 rng(StreamSeed(config.seed, 4));
    Eigen::VectorXd obs = probe.Reset(rng);
    for (int t = 0; t < opts.horizon; ++t) {
      const Eigen::VectorXd u = run.policy.Act(obs);
      states.push_back(Flatten(probe.state()));
      controls.push_back(u);
      const StepOutcome step = probe.Step(u);
      if (step.done) break;
      obs = step.obs;
    }
  }
  const auto samples = SampleTrajectory(states, controls, config.error_samples);
  ExactBypass fresh(map);
  Surrogate& reference = exact ? *f : fresh;
  const ErrorMeasurement m = MeasureRelativeError(samples, SwimmerStepFunction(*model, reference, config.rl.env.dt),
                                                  SwimmerStepFunction(*model, *f, config.rl.env.dt));
  std::vector<Eigen::VectorXd> qs;
  for (const auto& x : states) qs.push_back(Unflatten(x).q);
  FillTiming(m, TimeMapEvaluation(*map, TimingInputs(qs, 5)), s);
  out.history = TrainHistoryRows(run.history);
  out.policy = run.policy;
  return out;
}

std::vector<ValidationCheck> ValidateSwimmerBackend() {
  constexpr double kRho = 1000.0, kPi = std::numbers::pi;
  auto added_mass = [&](const BoundaryMesh& mesh, const Eigen::Vector2d& dir) {
    BemSolver solver(mesh);
    const Eigen::VectorXd sigma = (dir.transpose() * mesh.Normals()).transpose();
    const Eigen::VectorXd phi = solver.Solve(sigma);
    return -kRho * (phi.array() * sigma.array() * mesh.Lengths().array()).sum();
  };
  std::vector<ValidationCheck> checks;
  {
    const double a = 0.1;
    BoundaryMesh mesh;
    AppendEllipse(mesh, Eigen::Vector2d::Zero(), 0.0, a, a, 128, 0);
    const double oracle = kRho * kPi * a * a;
    const double err = std::abs(added_mass(mesh, {1, 0}) - oracle) / oracle;
    checks.push_back({"circle added mass vs rho*pi*a^2 (P=128)", err < 0.02, err, 0.02});
  }
  {
    const double a = 0.1, b = 0.025;
    BoundaryMesh mesh;
    AppendEllipse(mesh, Eigen::Vector2d::Zero(), 0.0, a, b, 256, 0);
    const double surge = kRho * kPi * b * b, sway = kRho * kPi * a * a;
    const double e1 = std::abs(added_mass(mesh, {1, 0}) - surge) / surge;
    const double e2 = std::abs(added_mass(mesh, {0, 1}) - sway) / sway;
    checks.push_back({"ellipse surge added mass vs rho*pi*b^2 (P=256)", e1 < 0.03, e1, 0.03});
    checks.push_back({"ellipse sway added mass vs rho*pi*a^2 (P=256)", e2 < 0.03, e2, 0.03});
  }
  return checks;
}

std::vector<ValidationCheck> ValidateArmBackend(const Config& config, const std::string& base_dir, int samples) {
  const ArmModel model(BuildArmMesh(config.arm, base_dir), config.arm.model);
  std::mt19937_64 rng(StreamSeed(config.seed, 7));
  std::uniform_real_distribution<double> uni(0.0, config.arm.max_tension);
  const int d = model.num_lines();
  double worst_residual = 0.0, worst_sensitivity = 0.0;
  const double h = 1e-6;
  for (int k = 0; k < samples; ++k) {
    Eigen::VectorXd u(d);
    for (auto& v : u) v = uni(rng);
    // Continuation from rest keeps every solve on the physical branch.
    Eigen::VectorXd x = model.RestState();
    QuasistaticResult r;
    for (int step = 1; step <= 4; ++step) {
      r = model.QuasistaticSolve(u * step / 4.0, x);
      x = r.x;
    }
    const Eigen::VectorXd residual = model.InternalForce(r.x) + model.ControlForce(r.x, u);
    worst_residual = std::max(worst_residual, residual.cwiseAbs().maxCoeff() / model.ForceScale());
    Eigen::MatrixXd fd(r.x.size(), d);
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd up = u, um = u;
      up[j] += h;
      um[j] = std::max(0.0, um[j] - h);
      fd.col(j) = (model.QuasistaticSolve(up, r.x).x - model.QuasistaticSolve(um, r.x).x) / (up[j] - um[j]);
    }
    worst_sensitivity = std::max(worst_sensitivity, (r.dx_du - fd).norm() / fd.norm());
  }
  return {
      {"quasistatic residual / force scale", worst_residual < 1e-8, worst_residual, 1e-8},
      {"sensitivity vs finite differences", worst_sensitivity < 1e-4, worst_sensitivity, 1e-4},
  };
}

}  // namespace hsid
