// Copyright 2026 The voi-twin Authors
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

// voi-twin: prior decision analysis and value-of-information studies for a
// fatigue-critical structural component.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "voi/cli/analyses.hpp"
#include "voi/cli/config.hpp"
#include "voi/cli/reporting.hpp"

namespace {

namespace fs = std::filesystem;
using namespace voi::cli;

constexpr int kExitOk = 0;
constexpr int kExitAnalysis = 1;
constexpr int kExitConfig = 2;

struct CommonArgs {
  std::string config_path;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "YAML run configuration (defaults when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("-n,--samples", args.samples, "number of outer (preposterior) draws; overrides analysis.n_outer")
      ->check(CLI::PositiveNumber);
  cmd->add_option("-s,--seed", args.seed, "random seed; overrides analysis.seed");
  cmd->add_option("-j,--workers", args.workers, "worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
  cmd->add_option("-o,--out-dir", args.out_dir, "output directory (env VOI_TWIN_OUT_DIR, default ./voi_twin_out)");
}

RunConfig resolve(const CommonArgs& args, Mode mode) {
  RunConfig c = args.config_path.empty() ? RunConfig{} : load_config(args.config_path);
  c.analysis.mode = mode;
  if (args.samples) c.analysis.n_outer = *args.samples;
  if (args.seed) c.analysis.seed = *args.seed;
  if (args.workers) c.analysis.workers = *args.workers;
  return c;
}

fs::path output_dir(const CommonArgs& args) {
  if (!args.out_dir.empty()) return args.out_dir;
  if (const char* env = std::getenv("VOI_TWIN_OUT_DIR"); env && *env) return env;
  return "voi_twin_out";
}

int finish(const ResultRecord& rec, const fs::path& dir) {
  write_record(rec, dir);
  for (const auto& line : rec.summary) std::cout << line << '\n';
  std::cout << fmt::format("wrote {} ({} tables, {} plot files)\n", dir.string(), rec.tables.size(), rec.plots.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Value-of-information analysis for structural integrity management"};
  app.require_subcommand(1);

  CommonArgs args;
  struct Analysis {
    Mode mode;
    const char* name;
    const char* help;
  };
  const Analysis analyses[] = {
      {Mode::Prior, "prior", "prior decision table over all mitigation actions"},
      {Mode::Voi, "voi", "value of the configured measurement plan"},
      {Mode::Subsets, "subsets", "perfect-information value of every subset of data sources"},
      {Mode::Sweep, "sweep", "value of one imprecise data source across measurement errors"},
      {Mode::Dynamic, "dynamic", "multi-window action sequences and their data value"},
  };
  std::vector<std::pair<CLI::App*, Mode>> commands;
  for (const auto& a : analyses) {
    auto* cmd = app.add_subcommand(a.name, a.help);
    add_common(cmd, args);
    commands.emplace_back(cmd, a.mode);
  }

  auto* calibrate = app.add_subcommand("calibrate", "cycles per window matching a target failure probability");
  add_common(calibrate, args);
  double target = 0.0357;
  calibrate->add_option("--target", target, "no-action failure probability to match")->check(CLI::Range(1e-9, 1.0));

  auto* init = app.add_subcommand("init-config", "write the default configuration as YAML");
  std::string init_path;
  bool force = false;
  init->add_option("path", init_path, "destination file (stdout when omitted)");
  init->add_flag("-f,--force", force, "overwrite an existing file");

  CLI11_PARSE(app, argc, argv);

  if (init->parsed()) {
    const std::string text = to_yaml(RunConfig{});
    if (init_path.empty()) {
      std::cout << text;
      return kExitOk;
    }
    if (fs::exists(init_path) && !force) {
      std::cerr << "error: " << init_path << " exists (use --force to overwrite)\n";
      return kExitConfig;
    }
    write_text(init_path, text);
    return kExitOk;
  }

  Mode mode = Mode::Prior;
  std::string kind = "calibrate";
  for (const auto& [cmd, m] : commands) {
    if (cmd->parsed()) {
      mode = m;
      kind = to_string(m);
    }
  }

  RunConfig config;
  try {
    config = resolve(args, mode);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  const fs::path dir = output_dir(args);
  try {
    if (calibrate->parsed()) return finish(run_calibrate(config, target), dir);
    return finish(run(config), dir);
  } catch (const voi::InvalidParameter& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    write_error(config, kind, e.what(), dir);
    return kExitConfig;
  } catch (const voi::Error& e) {
    std::cerr << "analysis error: " << e.what() << '\n';
    write_error(config, kind, e.what(), dir);
    return kExitAnalysis;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitAnalysis;
  }
}
