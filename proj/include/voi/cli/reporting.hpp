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

#ifndef VOI_CLI_REPORTING_HPP
#define VOI_CLI_REPORTING_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "voi/cli/config.hpp"

#ifndef VOI_TWIN_VERSION
#define VOI_TWIN_VERSION "0.0.0"
#endif

namespace voi::cli {

inline constexpr const char* kEngineVersion = VOI_TWIN_VERSION;

/// Plot data requested for a record kind that has none.
class ReportError : public Error {
 public:
  using Error::Error;
};

/// Numbers in the shortest form that parses back to the same double; NaN as an empty cell.
inline std::string num(double x) { return std::isnan(x) ? std::string() : fmt::format("{}", x); }
inline std::string num(std::size_t x) { return fmt::format("{}", x); }

struct Table {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
        if (!quote) {
          out += cells[i];
          continue;
        }
        out += '"';
        for (char c : cells[i]) {
          if (c == '"') out += '"';
          out += c;
        }
        out += '"';
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) {
      if (r.size() != header.size()) throw ReportError(fmt::format("table {}: ragged row", name));
      line(r);
    }
    return out;
  }
};

/// Everything one analysis run produces.
struct ResultRecord {
  std::string kind;  // prior, voi, subsets, sweep, dynamic or calibrate
  RunConfig config;
  std::string timestamp;
  nlohmann::json payload = nlohmann::json::object();
  std::vector<Table> tables;
  std::vector<Table> plots;
  std::vector<std::string> summary;  // human-readable lines for stdout
};

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json config_json(const RunConfig& c) {
  using nlohmann::json;
  auto m = [](const dist::MarginalSpec& s) { return json{{"m", s.a}, {"sd", s.b}}; };
  json sources = json::array();
  for (const auto& s : c.analysis.sources) {
    json j{{"kind", to_string(s.kind)}};
    j["epsilon"] = s.epsilon ? json(*s.epsilon) : json(nullptr);
    sources.push_back(j);
  }
  return {
      {"priors",
       {{"mu_sigma_L", m(c.priors.mu_sigma_L)},
        {"sd_sigma_L", m(c.priors.sd_sigma_L)},
        {"alpha_scf", m(c.priors.alpha_scf)},
        {"gamma_scf", m(c.priors.gamma_scf)},
        {"mu_sigma_Y", m(c.priors.mu_sigma_Y)},
        {"sd_sigma_Y", m(c.priors.sd_sigma_Y)},
        {"rho", c.priors.rho}}},
      {"costs",
       {{"c_fail", c.costs.c_fail},
        {"c_repair", c.costs.c_repair},
        {"c_replace", c.costs.c_replace},
        {"c_reduce", c.costs.c_reduce},
        {"c_site_visit", c.costs.c_site_visit},
        {"site_visit_for_reduce", c.costs.site_visit_for_reduce}}},
      {"sn", {{"log10_a", c.sn.log10_a}, {"slope_m", c.sn.slope_m}, {"scatter_sd", c.sn.scatter_sd}}},
      {"load", {{"annual_cycles", c.load.annual_cycles}, {"windows", c.load.windows}}},
      {"analysis",
       {{"mode", to_string(c.analysis.mode)},
        {"n_samples", c.analysis.n_samples},
        {"n_inner", c.analysis.n_inner},
        {"n_outer", c.analysis.n_outer},
        {"seed", c.analysis.seed},
        {"sources", sources},
        {"sweep_kind", to_string(c.analysis.sweep_kind)},
        {"epsilons", c.analysis.epsilons},
        {"ess_floor", c.analysis.ess_floor},
        {"max_degenerate_fraction", c.analysis.max_degenerate_fraction},
        {"workers", c.analysis.workers}}},
  };
}

inline std::string config_hash(const RunConfig& c) { return fmt::format("{:016x}", fnv1a64(to_yaml(c))); }

inline nlohmann::json to_json(const ResultRecord& r) {
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& t : r.tables) tables.push_back(t.name + ".csv");
  for (const auto& t : r.plots) tables.push_back(t.name + ".csv");
  return {
      {"metadata",
       {{"engine_version", kEngineVersion},
        {"config_hash", config_hash(r.config)},
        {"seed", r.config.analysis.seed},
        {"timestamp", r.timestamp}}},
      {"analysis", r.kind},
      {"payload", r.payload},
      {"files", tables},
      {"config", config_json(r.config)},
  };
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw Error(fmt::format("failed writing '{}'", path.string()));
}

/// Writes the plot CSVs of a record. Throws ReportError for kinds without plot data.
inline std::vector<std::filesystem::path> emit_plot_data(const ResultRecord& r, const std::filesystem::path& dir) {
  if (r.plots.empty()) throw ReportError(fmt::format("analysis '{}' has no plot data", r.kind));
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& t : r.plots) {
    written.push_back(dir / (t.name + ".csv"));
    write_text(written.back(), t.to_csv());
  }
  return written;
}

/// Writes result.json, config.yaml, the CSV tables and any plot data into dir.
inline void write_record(const ResultRecord& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "result.json", to_json(r).dump(2) + "\n");
  write_text(dir / "config.yaml", to_yaml(r.config));
  for (const auto& t : r.tables) write_text(dir / (t.name + ".csv"), t.to_csv());
  if (!r.plots.empty()) emit_plot_data(r, dir);
}

/// Diagnostic record written when an analysis fails.
inline void write_error(const RunConfig& c, const std::string& kind, const std::string& message,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json j{
      {"metadata",
       {{"engine_version", kEngineVersion},
        {"config_hash", config_hash(c)},
        {"seed", c.analysis.seed},
        {"timestamp", utc_timestamp()}}},
      {"analysis", kind},
      {"error", message},
      {"config", config_json(c)},
  };
  write_text(dir / "error.json", j.dump(2) + "\n");
}

}  // namespace voi::cli

#endif  // VOI_CLI_REPORTING_HPP
