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

#ifndef HSID_CONFIG_H_
#define HSID_CONFIG_H_

#include <cstdint>
#include <istream>
#include <string>

#include "hsid/arm_mesh.h"
#include "hsid/bem_swimmer.h"
#include "hsid/driver.h"
#include "hsid/fem_arm.h"
#include "hsid/planner.h"
#include "hsid/rl_control.h"
#include "hsid/tasks.h"

namespace hsid {

struct GridSettings {
  double base_cell = 0.5;
  double threshold = 0.2;
};

struct ArmSettings {
  ArmConfig model;
  ArmMeshOptions mesh;
  std::string mesh_file;  // overrides `mesh` when set
  GridSettings grid{0.5, 0.2};
  int horizon = 100;
  double dt = 0.02;
  double max_tension = 2.0;
  double initial_control = 1.0;
  RewardSpec reward;
};

struct SwimmerSettings {
  SwimmerConfig model;
  GridSettings grid{0.3, 0.1};
  int horizon = 200;
  double dt = 5e-3;
  // Initial plan: travelling torque wave amp * sin(2 pi freq t + j pi / 2).
  double initial_amplitude = 0.025;
  double initial_frequency = 2.0;
  RewardSpec reward;
};

struct RlSettings {
  TrainOptions train;
  SwimmerEnvOptions env;
  int hidden = 32;
  double init_std_fraction = 0.5;
};

struct Config {
  std::uint64_t seed = 0;
  ArmSettings arm;
  SwimmerSettings swimmer;
  PlannerOptions planner;
  double planner_budget_growth = 2.0;  // per-level growth of the iteration budget
  RlSettings rl;
  int error_samples = 100;  // states used to measure the dynamics error
};

// Defaults used when a key is absent.
Config DefaultConfig();

// INI text: sections [run] [arm] [arm_reward] [swimmer] [swimmer_reward]
// [planner] [rl] [report], `key = value` lines, ';' or '#' comments.
// Unknown sections or keys, unparsable values and out-of-range settings
// throw ConfigError. The arm mesh file is not read here.
Config ParseConfig(std::istream& in);
Config LoadConfig(const std::string& path);

// Throws ConfigError on inconsistent settings.
void ValidateConfig(const Config& config);

// Builds the arm mesh: from `mesh_file` when set (relative to `base_dir`),
// else the structured default.
ArmMesh BuildArmMesh(const ArmSettings& settings, const std::string& base_dir = ".");

}  // namespace hsid

#endif  // HSID_CONFIG_H_
