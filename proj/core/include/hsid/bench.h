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

#ifndef HSID_BENCH_H_
#define HSID_BENCH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hsid/config.h"
#include "hsid/report.h"

namespace hsid {

struct BenchOutput {
  RunSummary summary;
  std::vector<IterationRow> history;
  ControlSequence controls;      // planning runs
  std::optional<Policy> policy;  // training runs
};

// Planning on the arm (arm_reward task) with the grid interleaved over its
// levels, or in exact mode with the same number of executions.
BenchOutput RunArmPlanBench(const Config& config, bool exact, const std::string& base_dir = ".");
BenchOutput RunSwimmerPlanBench(const Config& config, bool exact);
BenchOutput RunSwimmerTrainBench(const Config& config, bool exact);

// Travelling torque wave used as the initial swimmer plan.
ControlSequence SwimmerInitialPlan(const SwimmerSettings& settings);

struct ValidationCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
};

// Classical potential-flow oracles: circle and ellipse added mass.
std::vector<ValidationCheck> ValidateSwimmerBackend();
// Quasistatic residual and sensitivity against finite differences.
std::vector<ValidationCheck> ValidateArmBackend(const Config& config, const std::string& base_dir = ".",
                                                int samples = 20);

}  // namespace hsid

#endif  // HSID_BENCH_H_
