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

#ifndef HSID_REPORT_H_
#define HSID_REPORT_H_

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsid/bem_swimmer.h"
#include "hsid/driver.h"
#include "hsid/fem_arm.h"
#include "hsid/surrogate.h"

namespace hsid {

inline constexpr const char* kHistoryHeader = "iteration,cumulative_exact_evals,objective,grid_level";

// One row per iteration, LF line endings, %.12g numbers.
void WriteHistoryCsv(const std::vector<IterationRow>& rows, std::ostream& out);
// Inverse of WriteHistoryCsv; throws InvalidInputError on a malformed file.
std::vector<IterationRow> ReadHistoryCsv(std::istream& in);
std::vector<IterationRow> TrainHistoryRows(const std::vector<TrainRecord>& history);

// Two-curve table: cumulative exact evaluations per iteration with and
// without the surrogate. Shorter runs are padded with their last value.
void WriteComparisonCsv(const std::vector<IterationRow>& surrogate, const std::vector<IterationRow>& exact,
                        std::ostream& out);

// A dynamics step g(x, u) returning the full next state.
using StepFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

struct StateSample {
  Eigen::VectorXd state;
  Eigen::VectorXd control;
};

// `count` samples spread evenly over the (state_i, control_i) pairs of a
// trajectory, cycling when the trajectory is shorter than `count`.
std::vector<StateSample> SampleTrajectory(const std::vector<Eigen::VectorXd>& states,
                                          const std::vector<Eigen::VectorXd>& controls, int count);

struct ErrorMeasurement {
  double mean_relative_error = 0.0;  // mean of |g - g~| / |g|
  double max_relative_error = 0.0;
  double exact_step_seconds = 0.0;   // mean time of one exact step
  double approx_step_seconds = 0.0;  // mean time of one surrogate step
  int samples = 0;
};

// One step of each stepper from every sample.
ErrorMeasurement MeasureRelativeError(const std::vector<StateSample>& samples, const StepFunction& exact,
                                      const StepFunction& approx);

// Full-state steppers. Arm samples are planner states (alpha_i, alpha_{i-1})
// and the output is x_{i+1} = f(alpha_{i+1}); swimmer samples are flattened
// 12-dim states.
StepFunction ArmStepFunction(const ArmModel& model, Surrogate& f, double dt);
StepFunction SwimmerStepFunction(const SwimmerModel& model, Surrogate& f, double dt);

// Mean seconds per exact map evaluation over the given inputs.
double TimeMapEvaluation(const ExpensiveMap& map, const std::vector<Eigen::VectorXd>& inputs);

struct RunSummary {
  std::string command;
  std::string task;
  bool exact_mode = false;
  std::uint64_t seed = 0;
  int state_dim = 0;    // N, full configuration dimension
  int control_dim = 0;  // input dimension of f
  int iterations = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  bool failed = false;
  std::string termination;
  std::int64_t exact_evals = 0;
  std::int64_t steps_simulated = 0;  // one exact f per step without a surrogate
  std::int64_t corner_count = 0;     // grid samples; 0 in exact mode
  double eval_reduction = 0.0;       // steps_simulated / exact_evals
  double t_f = 0.0;
  double t_g = 0.0;
  double t_g_approx = 0.0;
  double run_seconds = 0.0;
  double estimated_no_surrogate_seconds = 0.0;  // evals avoided * t_f
  double relative_error = 0.0;
  double max_relative_error = 0.0;
  std::vector<LevelRecord> levels;
};

void WriteSummaryJson(const RunSummary& summary, std::ostream& out);
RunSummary ReadSummaryJson(std::istream& in);

}  // namespace hsid

#endif  // HSID_REPORT_H_
