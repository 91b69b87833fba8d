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

// hsid: planning and training benchmarks on the arm and swimmer backends.
//
//   hsid plan-arm      --config FILE [--exact] [--seed N] [--out-dir DIR]
//   hsid plan-swimmer  --config FILE [--exact] [--seed N] [--out-dir DIR]
//   hsid train-swimmer --config FILE [--exact] [--seed N] [--out-dir DIR]
//   hsid validate      --backend arm|swimmer [--config FILE]
//   hsid report        --run DIR [--compare DIR] [--out-dir DIR]
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hsid/bench.h"
#include "hsid/error.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

namespace fs = std::filesystem;

struct RunFlags {
  std::string config_path;
  bool exact = false;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "hsid_out";
};

void AddRunFlags(CLI::App* cmd, RunFlags& flags) {
  cmd->add_option("--config", flags.config_path, "INI configuration file (defaults when omitted)");
  cmd->add_flag("--exact", flags.exact, "evaluate f exactly instead of through the grid");
  cmd->add_option("--seed", flags.seed, "random seed (overrides [run] seed)");
  cmd->add_option("--out-dir", flags.out_dir, "directory for history.csv and summary.json");
}

hsid::Config LoadRunConfig(const RunFlags& flags) {
  hsid::Config config = flags.config_path.empty() ? hsid::DefaultConfig() : hsid::LoadConfig(flags.config_path);
  if (flags.seed) config.seed = *flags.seed;
  return config;
}

std::string ConfigDir(const RunFlags& flags) {
  if (flags.config_path.empty()) return ".";
  const fs::path parent = fs::path(flags.config_path).parent_path();
  return parent.empty() ? "." : parent.string();
}

std::ofstream OpenOutput(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hsid::ConfigError("cannot write '" + path.string() + "'");
  return out;
}

void WriteOutputs(const hsid::BenchOutput& result, const std::string& out_dir) {
  fs::create_directories(out_dir);
  {
    auto out = OpenOutput(fs::path(out_dir) / "history.csv");
    hsid::WriteHistoryCsv(result.history, out);
  }
  {
    auto out = OpenOutput(fs::path(out_dir) / "summary.json");
    hsid::WriteSummaryJson(result.summary, out);
  }
  if (!result.controls.empty()) {
    auto out = OpenOutput(fs::path(out_dir) / "controls.csv");
    out << "step";
    for (Eigen::Index j = 0; j < result.controls.front().size(); ++j) out << ",u" << j;
    out << '\n';
    for (std::size_t i = 0; i < result.controls.size(); ++i) {
      out << i + 1;
      for (Eigen::Index j = 0; j < result.controls[i].size(); ++j) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.12g", result.controls[i][j]);
        out << ',' << buf;
      }
      out << '\n';
    }
  }
  if (result.policy) {
    auto out = OpenOutput(fs::path(out_dir) / "policy.bin");
    hsid::SavePolicy(*result.policy, out);
  }
}

void PrintSummary(const hsid::RunSummary& s, const std::string& out_dir) {
  std::printf("%s (%s, %s): objective %.6g -> %.6g over %d iterations%s\n", s.command.c_str(), s.task.c_str(),
              s.exact_mode ? "exact" : "surrogate", s.initial_objective, s.final_objective, s.iterations,
              s.failed ? " [level failure, best prior solution kept]" : "");
  std::printf("  exact f evaluations %lld, simulated steps %lld, corners %lld\n",
              static_cast<long long>(s.exact_evals), static_cast<long long>(s.steps_simulated),
              static_cast<long long>(s.corner_count));
  std::printf("  relative step error %.3g (max %.3g), t_f %.3g s, run %.1f s\n", s.relative_error,
              s.max_relative_error, s.t_f, s.run_seconds);
  std::printf("  wrote %s\n", out_dir.c_str());
}

int RunBench(const std::string& name, const RunFlags& flags) {
  const hsid::Config config = LoadRunConfig(flags);
  hsid::BenchOutput result;
  if (name == "plan-arm") {
    result = hsid::RunArmPlanBench(config, flags.exact, ConfigDir(flags));
  } else if (name == "plan-swimmer") {
    result = hsid::RunSwimmerPlanBench(config, flags.exact);
  } else {
    result = hsid::RunSwimmerTrainBench(config, flags.exact);
  }
  WriteOutputs(result, flags.out_dir);
  PrintSummary(result.summary, flags.out_dir);
  return kExitOk;
}

int RunValidate(const std::string& backend, const RunFlags& flags) {
  std::vector<hsid::ValidationCheck> checks;
  if (backend == "swimmer") {
    checks = hsid::ValidateSwimmerBackend();
  } else if (backend == "arm") {
    checks = hsid::ValidateArmBackend(LoadRunConfig(flags), ConfigDir(flags));
  } else {
    throw hsid::ConfigError("unknown backend '" + backend + "' (expected arm or swimmer)");
  }
  bool all = true;
  for (const auto& c : checks) {
    std::printf("%s %s: %.3g (limit %.3g)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.limit);
    all = all && c.pass;
  }
  return all ? kExitOk : kExitSolver;
}

std::vector<hsid::IterationRow> ReadHistory(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "history.csv");
  if (!in) throw hsid::ConfigError("no history.csv in '" + dir + "'");
  return hsid::ReadHistoryCsv(in);
}

hsid::RunSummary ReadSummary(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "summary.json");
  if (!in) throw hsid::ConfigError("no summary.json in '" + dir + "'");
  return hsid::ReadSummaryJson(in);
}

int RunReport(const std::string& run_dir, const std::string& compare_dir, const std::string& out_dir) {
  const auto history = ReadHistory(run_dir);
  const hsid::RunSummary summary = ReadSummary(run_dir);
  fs::create_directories(out_dir);
  auto out = OpenOutput(fs::path(out_dir) / "comparison.csv");
  if (compare_dir.empty()) {
    hsid::WriteComparisonCsv(history, {}, out);
    std::printf("%s: %lld exact evaluations over %zu rows\n", summary.command.c_str(),
                static_cast<long long>(summary.exact_evals), history.size());
    return kExitOk;
  }
  const auto other = ReadHistory(compare_dir);
  const hsid::RunSummary other_summary = ReadSummary(compare_dir);
  const bool run_is_exact = summary.exact_mode;
  if (run_is_exact == other_summary.exact_mode) {
    throw hsid::ConfigError("report --compare needs one surrogate run and one exact run");
  }
  const auto& surrogate = run_is_exact ? other : history;
  const auto& exact = run_is_exact ? history : other;
  const auto& s_sum = run_is_exact ? other_summary : summary;
  const auto& e_sum = run_is_exact ? summary : other_summary;
  hsid::WriteComparisonCsv(surrogate, exact, out);
  const double ratio = s_sum.exact_evals > 0 ? static_cast<double>(e_sum.exact_evals) / s_sum.exact_evals : 0.0;
  std::printf("exact evaluations: %lld with surrogate, %lld without (%.1fx fewer)\n",
              static_cast<long long>(s_sum.exact_evals), static_cast<long long>(e_sum.exact_evals), ratio);
  std::printf("objective: %.6g with surrogate, %.6g without\n", s_sum.final_objective, e_sum.final_objective);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical grid surrogates for planning and control of soft and swimming robots"};
  app.require_subcommand(1);
  RunFlags flags;
  std::string backend, run_dir, compare_dir, report_out = "hsid_report";
  for (const char* name : {"plan-arm", "plan-swimmer", "train-swimmer"}) {
    AddRunFlags(app.add_subcommand(name, std::string("run the ") + name + " benchmark"), flags);
  }
  CLI::App* validate = app.add_subcommand("validate", "run backend oracles and print PASS/FAIL");
  validate->add_option("--backend", backend, "arm or swimmer")->required();
  validate->add_option("--config", flags.config_path, "INI configuration file");
  validate->add_option("--seed", flags.seed, "random seed for sampled controls");
  CLI::App* report = app.add_subcommand("report", "summarize or compare finished runs");
  report->add_option("--run", run_dir, "run output directory")->required();
  report->add_option("--compare", compare_dir, "second run directory (the other mode)");
  report->add_option("--out-dir", report_out, "directory for comparison.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    if (name == "validate") return RunValidate(backend, flags);
    if (name == "report") return RunReport(run_dir, compare_dir, report_out);
    return RunBench(name, flags);
  } catch (const hsid::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const hsid::InvalidInputError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitConfig;
  } catch (const hsid::Error& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }
}
