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

#include "hsid/report.h"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "hsid/error.h"

namespace hsid {
namespace {

std::string FormatNumber(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double Seconds(std::chrono::steady_clock::duration d) { return std::chrono::duration<double>(d).count(); }

nlohmann::json Number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double NumberOr(const nlohmann::json& j, const char* key) {
  return j.contains(key) && j[key].is_number() ? j[key].get<double>()
                                              : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

void WriteHistoryCsv(const std::vector<IterationRow>& rows, std::ostream& out) {
  out << kHistoryHeader << '\n';
  for (const IterationRow& r : rows) {
    out << r.iteration << ',' << r.cumulative_exact_evals << ',' << FormatNumber(r.objective) << ','
        << r.grid_level << '\n';
  }
}

std::vector<IterationRow> ReadHistoryCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHistoryHeader) {
    throw InvalidInputError("history csv: missing or unexpected header");
  }
  std::vector<IterationRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    IterationRow r;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream fields(line);
    std::string rest;
    if (!(fields >> r.iteration >> c1 >> r.cumulative_exact_evals >> c2 >> r.objective >> c3 >> r.grid_level) ||
        c1 != ',' || c2 != ',' || c3 != ',' || (fields >> rest)) {
      throw InvalidInputError("history csv: malformed row '" + line + "'");
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<IterationRow> TrainHistoryRows(const std::vector<TrainRecord>& history) {
  std::vector<IterationRow> rows;
  for (const TrainRecord& r : history) {
    rows.push_back(IterationRow{r.iteration, r.cumulative_exact_evals, r.mean_return, r.grid_level});
  }
  return rows;
}

void WriteComparisonCsv(const std::vector<IterationRow>& surrogate, const std::vector<IterationRow>& exact,
                        std::ostream& out) {
  out << "iteration,exact_evals_with_surrogate,exact_evals_without_surrogate\n";
  const std::size_t n = std::max(surrogate.size(), exact.size());
  auto at = [](const std::vector<IterationRow>& rows, std::size_t i) -> std::int64_t {
    if (rows.empty()) return 0;
    return rows[std::min(i, rows.size() - 1)].cumulative_exact_evals;
  };
  for (std::size_t i = 0; i < n; ++i) out << i << ',' << at(surrogate, i) << ',' << at(exact, i) << '\n';
}

std::vector<StateSample> SampleTrajectory(const std::vector<Eigen::VectorXd>& states,
                                          const std::vector<Eigen::VectorXd>& controls, int count) {
  const std::size_t n = std::min(states.size(), controls.size());
  if (n == 0 || count < 1) throw InvalidInputError("sample: empty trajectory or count");
  std::vector<StateSample> out;
  for (int k = 0; k < count; ++k) {
    const std::size_t i = count <= static_cast<int>(n) ? (k * n) / count : k % n;
    out.push_back(StateSample{states[i], controls[i]});
  }
  return out;
}

ErrorMeasurement MeasureRelativeError(const std::vector<StateSample>& samples, const StepFunction& exact,
                                      const StepFunction& approx) {
  ErrorMeasurement m;
  std::chrono::steady_clock::duration t_exact{}, t_approx{};
  for (const StateSample& s : samples) {
    auto t0 = std::chrono::steady_clock::now();
    const Eigen::VectorXd g = exact(s.state, s.control);
    auto t1 = std::chrono::steady_clock::now();
    const Eigen::VectorXd h = approx(s.state, s.control);
    auto t2 = std::chrono::steady_clock::now();
    t_exact += t1 - t0;
    t_approx += t2 - t1;
    const double e = (g - h).norm() / g.norm();
    m.mean_relative_error += e;
    m.max_relative_error = std::max(m.max_relative_error, e);
  }
  m.samples = static_cast<int>(samples.size());
  if (m.samples > 0) {
    m.mean_relative_error /= m.samples;
    m.exact_step_seconds = Seconds(t_exact) / m.samples;
    m.approx_step_seconds = Seconds(t_approx) / m.samples;
  }
  return m;
}

StepFunction ArmStepFunction(const ArmModel& model, Surrogate& f, double dt) {
  return [&model, &f, dt](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    const int d = model.num_lines();
    ProjectedStepOptions opts;
    opts.dt = dt;
    const ProjectedStepResult r =
        ProjectedStep(model, LatentState{x.head(d), x.tail(d)}, u, f, opts);
    return r.x;
  };
}

StepFunction SwimmerStepFunction(const SwimmerModel& model, Surrogate& f, double dt) {
  return [&model, &f, dt](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    const SwimmerState next = StepSwimmer(model, Unflatten(x), u, dt, f);
    return Eigen::VectorXd(Flatten(next));
  };
}

double TimeMapEvaluation(const ExpensiveMap& map, const std::vector<Eigen::VectorXd>& inputs) {
  if (inputs.empty()) return 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& x : inputs) map.Evaluate(x);
  return Seconds(std::chrono::steady_clock::now() - t0) / inputs.size();
}

void WriteSummaryJson(const RunSummary& s, std::ostream& out) {
  nlohmann::ordered_json j;
  j["command"] = s.command;
  j["task"] = s.task;
  j["mode"] = s.exact_mode ? "exact" : "surrogate";
  j["seed"] = s.seed;
  j["state_dim"] = s.state_dim;
  j["control_dim"] = s.control_dim;
  j["iterations"] = s.iterations;
  j["initial_objective"] = Number(s.initial_objective);
  j["final_objective"] = Number(s.final_objective);
  j["failed"] = s.failed;
  j["termination"] = s.termination;
  j["exact_evals"] = s.exact_evals;
  j["steps_simulated"] = s.steps_simulated;
  j["corner_count"] = s.corner_count;
  j["eval_reduction"] = Number(s.eval_reduction);
  j["t_f_seconds"] = Number(s.t_f);
  j["t_g_seconds"] = Number(s.t_g);
  j["t_g_surrogate_seconds"] = Number(s.t_g_approx);
  j["run_seconds"] = Number(s.run_seconds);
  j["estimated_no_surrogate_seconds"] = Number(s.estimated_no_surrogate_seconds);
  j["relative_error"] = Number(s.relative_error);
  j["max_relative_error"] = Number(s.max_relative_error);
  nlohmann::ordered_json levels = nlohmann::ordered_json::array();
  for (const LevelRecord& l : s.levels) {
    nlohmann::ordered_json e;
    e["level"] = l.level;
    e["iterations"] = l.iterations;
    e["initial_objective"] = Number(l.initial_objective);
    e["final_objective"] = Number(l.final_objective);
    e["new_exact_evals"] = l.exact_evals_after - l.exact_evals_before;
    e["drift"] = Number(l.drift);
    e["failed"] = l.failed;
    if (l.failed) e["error"] = l.error;
    levels.push_back(e);
  }
  j["levels"] = levels;
  out << j.dump(2) << '\n';
}

RunSummary ReadSummaryJson(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("summary: ") + e.what());
  }
  RunSummary s;
  try {
    s.command = j.at("command").get<std::string>();
    s.task = j.at("task").get<std::string>();
    s.exact_mode = j.at("mode").get<std::string>() == "exact";
    s.seed = j.at("seed").get<std::uint64_t>();
    s.state_dim = j.at("state_dim").get<int>();
    s.control_dim = j.at("control_dim").get<int>();
    s.iterations = j.at("iterations").get<int>();
    s.initial_objective = NumberOr(j, "initial_objective");
    s.final_objective = NumberOr(j, "final_objective");
    s.failed = j.at("failed").get<bool>();
    s.termination = j.at("termination").get<std::string>();
    s.exact_evals = j.at("exact_evals").get<std::int64_t>();
    s.steps_simulated = j.at("steps_simulated").get<std::int64_t>();
    s.corner_count = j.at("corner_count").get<std::int64_t>();
    s.eval_reduction = NumberOr(j, "eval_reduction");
    s.t_f = NumberOr(j, "t_f_seconds");
    s.t_g = NumberOr(j, "t_g_seconds");
    s.t_g_approx = NumberOr(j, "t_g_surrogate_seconds");
    s.run_seconds = NumberOr(j, "run_seconds");
    s.estimated_no_surrogate_seconds = NumberOr(j, "estimated_no_surrogate_seconds");
    s.relative_error = NumberOr(j, "relative_error");
    s.max_relative_error = NumberOr(j, "max_relative_error");
    for (const auto& e : j.at("levels")) {
      LevelRecord l;
      l.level = e.at("level").get<int>();
      l.iterations = e.at("iterations").get<int>();
      l.initial_objective = NumberOr(e, "initial_objective");
      l.final_objective = NumberOr(e, "final_objective");
      l.exact_evals_after = e.at("new_exact_evals").get<std::int64_t>();
      l.drift = NumberOr(e, "drift");
      l.failed = e.at("failed").get<bool>();
      if (e.contains("error")) l.error = e["error"].get<std::string>();
      s.levels.push_back(l);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("summary: ") + e.what());
  }
  return s;
}

}  // namespace hsid
