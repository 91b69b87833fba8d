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

#include "hsid/config.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <utility>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hsid/error.h"

namespace hsid {
namespace {

using Setter = std::function<void(Config&, const std::string&)>;

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double ParseDouble(const std::string& text) {
  const std::string s = Trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("not a finite number: '" + text + "'");
  }
  return v;
}

long long ParseInt(const std::string& text) {
  const std::string s = Trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("not an integer: '" + text + "'");
  }
  return v;
}

bool ParseBool(const std::string& text) {
  const std::string s = Trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("not a boolean: '" + text + "'");
}

// "x y r, x y r, ..."
std::vector<Obstacle> ParseObstacles(const std::string& text) {
  std::vector<Obstacle> out;
  std::stringstream items(text);
  std::string item;
  while (std::getline(items, item, ',')) {
    if (Trim(item).empty()) continue;
    std::istringstream fields(item);
    std::string a, b, c, extra;
    if (!(fields >> a >> b >> c) || (fields >> extra)) {
      throw ConfigError("obstacle must be 'x y radius': '" + item + "'");
    }
    out.push_back(Obstacle{Eigen::Vector2d(ParseDouble(a), ParseDouble(b)), ParseDouble(c)});
  }
  return out;
}

template <typename T>
Setter Real(T Config::*section, double T::*field) {
  return [=](Config& c, const std::string& v) { (c.*section).*field = ParseDouble(v); };
}

template <typename T>
Setter Integer(T Config::*section, int T::*field) {
  return [=](Config& c, const std::string& v) { (c.*section).*field = static_cast<int>(ParseInt(v)); };
}

void AddRewardKeys(std::map<std::string, Setter>& keys, const std::string& section,
                   RewardSpec& (*get)(Config&)) {
  keys[section + ".task"] = [get](Config& c, const std::string& v) { get(c).task = ParseTask(Trim(v)); };
  keys[section + ".tracking_weight"] = [get](Config& c, const std::string& v) {
    get(c).tracking_weight = ParseDouble(v);
  };
  keys[section + ".control_weight"] = [get](Config& c, const std::string& v) {
    get(c).control_weight = ParseDouble(v);
  };
  keys[section + ".obstacle_weight"] = [get](Config& c, const std::string& v) {
    get(c).obstacle_weight = ParseDouble(v);
  };
  keys[section + ".circle_center_x"] = [get](Config& c, const std::string& v) {
    get(c).circle_center.x() = ParseDouble(v);
  };
  keys[section + ".circle_center_y"] = [get](Config& c, const std::string& v) {
    get(c).circle_center.y() = ParseDouble(v);
  };
  keys[section + ".circle_radius"] = [get](Config& c, const std::string& v) {
    get(c).circle_radius = ParseDouble(v);
  };
  keys[section + ".obstacles"] = [get](Config& c, const std::string& v) { get(c).obstacles = ParseObstacles(v); };
}

const std::map<std::string, Setter>& KeyTable() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> k;
    k["run.seed"] = [](Config& c, const std::string& v) {
      const long long s = ParseInt(v);
      if (s < 0) throw ConfigError("seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(s);
    };

    auto arm = [](Config& c) -> ArmSettings& { return c.arm; };
    auto armf = [arm](double ArmConfig::*f) {
      return Setter([=](Config& c, const std::string& v) { arm(c).model.*f = ParseDouble(v); });
    };
    k["arm.young_stiff"] = armf(&ArmConfig::young0);
    k["arm.young_soft"] = armf(&ArmConfig::young1);
    k["arm.poisson"] = armf(&ArmConfig::poisson);
    k["arm.density"] = armf(&ArmConfig::density);
    k["arm.gravity"] = armf(&ArmConfig::gravity);
    k["arm.rayleigh"] = armf(&ArmConfig::rayleigh);
    k["arm.newton_tol"] = armf(&ArmConfig::newton_tol);
    k["arm.newton_max_iters"] = [](Config& c, const std::string& v) {
      c.arm.model.newton_max_iters = static_cast<int>(ParseInt(v));
    };
    k["arm.mesh_file"] = [](Config& c, const std::string& v) { c.arm.mesh_file = Trim(v); };
    k["arm.mesh_width"] = [](Config& c, const std::string& v) { c.arm.mesh.width = ParseDouble(v); };
    k["arm.mesh_length"] = [](Config& c, const std::string& v) { c.arm.mesh.length = ParseDouble(v); };
    k["arm.mesh_columns"] = [](Config& c, const std::string& v) { c.arm.mesh.columns = static_cast<int>(ParseInt(v)); };
    k["arm.mesh_rows"] = [](Config& c, const std::string& v) { c.arm.mesh.rows = static_cast<int>(ParseInt(v)); };
    k["arm.mesh_band_rows"] = [](Config& c, const std::string& v) {
      c.arm.mesh.band_rows = static_cast<int>(ParseInt(v));
    };
    k["arm.base_cell"] = [](Config& c, const std::string& v) { c.arm.grid.base_cell = ParseDouble(v); };
    k["arm.threshold"] = [](Config& c, const std::string& v) { c.arm.grid.threshold = ParseDouble(v); };
    k["arm.horizon"] = Integer(&Config::arm, &ArmSettings::horizon);
    k["arm.dt"] = Real(&Config::arm, &ArmSettings::dt);
    k["arm.max_tension"] = Real(&Config::arm, &ArmSettings::max_tension);
    k["arm.initial_control"] = Real(&Config::arm, &ArmSettings::initial_control);
    AddRewardKeys(k, "arm_reward", [](Config& c) -> RewardSpec& { return c.arm.reward; });

    auto swf = [](double SwimmerConfig::*f) {
      return Setter([=](Config& c, const std::string& v) { c.swimmer.model.*f = ParseDouble(v); });
    };
    auto link = [](double SwimmerLink::*f) {
      return Setter([=](Config& c, const std::string& v) {
        const double x = ParseDouble(v);
        for (auto& l : c.swimmer.model.links) l.*f = x;
      });
    };
    k["swimmer.link_length"] = link(&SwimmerLink::a);
    k["swimmer.link_width"] = link(&SwimmerLink::b);
    k["swimmer.link_density"] = link(&SwimmerLink::density);
    k["swimmer.panels_per_link"] = [](Config& c, const std::string& v) {
      const int p = static_cast<int>(ParseInt(v));
      for (auto& l : c.swimmer.model.links) l.panels = p;
    };
    k["swimmer.fluid_density"] = swf(&SwimmerConfig::fluid_density);
    k["swimmer.gap_ratio"] = swf(&SwimmerConfig::gap_ratio);
    k["swimmer.joint_limit"] = swf(&SwimmerConfig::joint_limit);
    k["swimmer.box_margin"] = swf(&SwimmerConfig::box_margin);
    k["swimmer.torque_limit"] = swf(&SwimmerConfig::torque_limit);
    k["swimmer.max_dt"] = swf(&SwimmerConfig::max_dt);
    k["swimmer.fd_step"] = swf(&SwimmerConfig::fd_step);
    k["swimmer.base_cell"] = [](Config& c, const std::string& v) { c.swimmer.grid.base_cell = ParseDouble(v); };
    k["swimmer.threshold"] = [](Config& c, const std::string& v) { c.swimmer.grid.threshold = ParseDouble(v); };
    k["swimmer.horizon"] = Integer(&Config::swimmer, &SwimmerSettings::horizon);
    k["swimmer.dt"] = Real(&Config::swimmer, &SwimmerSettings::dt);
    k["swimmer.initial_amplitude"] = Real(&Config::swimmer, &SwimmerSettings::initial_amplitude);
    k["swimmer.initial_frequency"] = Real(&Config::swimmer, &SwimmerSettings::initial_frequency);
    AddRewardKeys(k, "swimmer_reward", [](Config& c) -> RewardSpec& { return c.swimmer.reward; });

    k["planner.max_iters"] = Integer(&Config::planner, &PlannerOptions::max_iters);
    k["planner.memory"] = Integer(&Config::planner, &PlannerOptions::memory);
    k["planner.grad_tol"] = Real(&Config::planner, &PlannerOptions::grad_tol);
    k["planner.reward_tol"] = Real(&Config::planner, &PlannerOptions::reward_tol);
    k["planner.initial_step"] = Real(&Config::planner, &PlannerOptions::initial_step);
    k["planner.max_backtracks"] = Integer(&Config::planner, &PlannerOptions::max_backtracks);
    k["planner.armijo"] = Real(&Config::planner, &PlannerOptions::armijo);
    k["planner.level_budget_growth"] = [](Config& c, const std::string& v) {
      c.planner_budget_growth = ParseDouble(v);
    };

    auto ppo = [](double PpoOptions::*f) {
      return Setter([=](Config& c, const std::string& v) { c.rl.train.ppo.*f = ParseDouble(v); });
    };
    auto ppoi = [](int PpoOptions::*f) {
      return Setter([=](Config& c, const std::string& v) { c.rl.train.ppo.*f = static_cast<int>(ParseInt(v)); });
    };
    k["rl.iterations"] = [](Config& c, const std::string& v) {
      c.rl.train.iterations = static_cast<int>(ParseInt(v));
    };
    k["rl.level_budget_growth"] = [](Config& c, const std::string& v) {
      c.rl.train.budget_growth = ParseDouble(v);
    };
    k["rl.batch_size"] = ppoi(&PpoOptions::batch_size);
    k["rl.epochs"] = ppoi(&PpoOptions::epochs);
    k["rl.minibatch"] = ppoi(&PpoOptions::minibatch);
    k["rl.clip"] = ppo(&PpoOptions::clip);
    k["rl.learning_rate"] = ppo(&PpoOptions::lr);
    k["rl.gamma"] = ppo(&PpoOptions::gamma);
    k["rl.lambda"] = ppo(&PpoOptions::lambda);
    k["rl.value_coef"] = ppo(&PpoOptions::value_coef);
    k["rl.entropy_coef"] = ppo(&PpoOptions::entropy_coef);
    k["rl.normalize_advantages"] = [](Config& c, const std::string& v) {
      c.rl.train.ppo.normalize_advantages = ParseBool(v);
    };
    k["rl.hidden"] = Integer(&Config::rl, &RlSettings::hidden);
    k["rl.init_std_fraction"] = Real(&Config::rl, &RlSettings::init_std_fraction);
    k["rl.horizon"] = [](Config& c, const std::string& v) { c.rl.env.horizon = static_cast<int>(ParseInt(v)); };
    k["rl.dt"] = [](Config& c, const std::string& v) { c.rl.env.dt = ParseDouble(v); };
    k["rl.reset_noise"] = [](Config& c, const std::string& v) { c.rl.env.reset_noise = ParseDouble(v); };
    k["rl.blowup_penalty"] = [](Config& c, const std::string& v) { c.rl.env.blowup_penalty = ParseDouble(v); };

    k["report.error_samples"] = [](Config& c, const std::string& v) {
      c.error_samples = static_cast<int>(ParseInt(v));
    };
    return k;
  }();
  return table;
}

}  // namespace

Config DefaultConfig() {
  Config c;
  c.arm.reward.task = Task::kArmCircle;
  c.arm.reward.circle_center = Eigen::Vector2d(0.0, -0.575);
  c.arm.reward.circle_radius = 0.025;
  c.arm.reward.tracking_weight = 1e3;
  c.arm.reward.control_weight = 1e-3;
  c.swimmer.reward.task = Task::kSwimForward;
  c.swimmer.reward.tracking_weight = 100.0;
  c.swimmer.reward.control_weight = 1e-3;
  c.planner.max_iters = 40;
  c.rl.train.budget_growth = 2.0;
  return c;
}

Config ParseConfig(std::istream& in) {
  const std::string text(std::istreambuf_iterator<char>(in), {});
  // The INI reader drops sections without keys, so headers are checked here.
  {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      const std::string t = Trim(line);
      if (t.size() < 2 || t.front() != '[' || t.back() != ']') continue;
      const std::string section = Trim(t.substr(1, t.size() - 2));
      bool known = false;
      for (const auto& [name, setter] : KeyTable()) known = known || name.rfind(section + ".", 0) == 0;
      if (!known) throw ConfigError("config: unknown section [" + section + "]");
    }
  }
  std::istringstream ini(text);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(ini, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  Config config = DefaultConfig();
  const auto& table = KeyTable();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config: key '" + section + "' outside a section");
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = table.find(full);
      if (it == table.end()) throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
      try {
        it->second(config, value.data());
      } catch (const ConfigError& e) {
        throw ConfigError("config: [" + section + "] " + key + ": " + e.what());
      }
    }
  }
  ValidateConfig(config);
  return config;
}

Config LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  return ParseConfig(in);
}

void ValidateConfig(const Config& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("config: ") + what);
  };
  for (const GridSettings* g : {&c.arm.grid, &c.swimmer.grid}) {
    require(g->base_cell > 0 && g->threshold > 0, "grid base_cell and threshold must be positive");
  }
  require(c.arm.horizon >= 2 && c.swimmer.horizon >= 2, "horizon must be at least 2");
  require(c.arm.dt > 0 && c.swimmer.dt > 0, "time steps must be positive");
  require(c.swimmer.dt <= c.swimmer.model.max_dt, "swimmer dt exceeds max_dt");
  require(c.arm.max_tension > 0, "arm max_tension must be positive");
  require(c.arm.initial_control >= 0 && c.arm.initial_control <= c.arm.max_tension,
          "arm initial_control outside [0, max_tension]");
  require(c.arm.model.young0 > 0 && c.arm.model.young1 > 0, "Young's moduli must be positive");
  require(c.arm.model.poisson > -1 && c.arm.model.poisson < 0.5, "Poisson ratio outside (-1, 0.5)");
  require(c.arm.model.density > 0 && c.arm.model.gravity >= 0 && c.arm.model.rayleigh >= 0,
          "arm density, gravity and damping must be non-negative");
  require(c.arm.model.newton_tol > 0 && c.arm.model.newton_max_iters > 0, "invalid Newton settings");
  require(c.arm.reward.task != Task::kSwimForward, "arm_reward task must be an arm task");
  require(c.swimmer.reward.task == Task::kSwimForward, "swimmer_reward task must be swim-forward");
  ValidateRewardSpec(c.arm.reward);
  ValidateRewardSpec(c.swimmer.reward);
  require(std::abs(c.swimmer.initial_amplitude) <= c.swimmer.model.torque_limit,
          "swimmer initial_amplitude exceeds torque_limit");
  const PlannerOptions& p = c.planner;
  require(p.max_iters >= 0 && p.memory >= 1 && p.grad_tol >= 0 && p.reward_tol >= 0 && p.initial_step > 0 &&
              p.max_backtracks >= 1 && p.armijo > 0 && p.armijo < 1,
          "invalid planner settings");
  const PpoOptions& o = c.rl.train.ppo;
  require(c.rl.train.iterations >= 0 && o.batch_size >= 1 && o.epochs >= 1 && o.minibatch >= 1 && o.clip >= 0 &&
              o.lr > 0 && o.gamma >= 0 && o.gamma <= 1 && o.lambda >= 0 && o.lambda <= 1 && o.value_coef >= 0,
          "invalid rl settings");
  require(c.planner_budget_growth > 0 && c.rl.train.budget_growth > 0, "level_budget_growth must be positive");
  require(c.rl.hidden >= 1 && c.rl.init_std_fraction > 0, "invalid policy settings");
  require(c.rl.env.horizon >= 1 && c.rl.env.dt > 0 && c.rl.env.dt <= c.swimmer.model.max_dt &&
              c.rl.env.reset_noise >= 0 && c.rl.env.reset_noise <= c.swimmer.model.joint_limit,
          "invalid rl environment settings");
  require(c.error_samples >= 1, "report error_samples must be positive");
}

ArmMesh BuildArmMesh(const ArmSettings& settings, const std::string& base_dir) {
  if (settings.mesh_file.empty()) return MakeArmMesh(settings.mesh);
  std::filesystem::path path(settings.mesh_file);
  if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open mesh file '" + path.string() + "'");
  return ReadArmMesh(in);
}

}  // namespace hsid
