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

#ifndef VOI_CLI_CONFIG_HPP
#define VOI_CLI_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "voi/decision_core.hpp"
#include "voi/errors.hpp"
#include "voi/structural_model.hpp"
#include "voi/voi_engine.hpp"

namespace voi::cli {

/// Configuration problem: unreadable file, YAML syntax error or invalid value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Mode { Prior, Voi, Subsets, Sweep, Dynamic };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Prior: return "prior";
    case Mode::Voi: return "voi";
    case Mode::Subsets: return "subsets";
    case Mode::Sweep: return "sweep";
    case Mode::Dynamic: return "dynamic";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(const std::string& s) {
  for (Mode m : {Mode::Prior, Mode::Voi, Mode::Subsets, Mode::Sweep, Mode::Dynamic}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

inline std::optional<DataKind> parse_kind(const std::string& s) {
  for (DataKind k : kAllKinds) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

struct AnalysisConfig {
  Mode mode = Mode::Prior;
  std::size_t n_samples = 100000;  // prior sample set for the prior and dynamic solves
  std::size_t n_inner = 10000;     // inner sample set of preposterior analyses
  std::size_t n_outer = 2000;
  std::uint64_t seed = 42;
  std::vector<DataSource> sources = {DataSource::perfect(DataKind::Shm)};
  DataKind sweep_kind = DataKind::Shm;
  std::vector<double> epsilons = {1e-3, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 1e3};
  double ess_floor = 50.0;
  double max_degenerate_fraction = 0.01;
  std::size_t workers = 1;

  bool operator==(const AnalysisConfig&) const = default;
};

struct RunConfig {
  PriorConfig priors;
  CostModel costs;
  SnModel sn;
  LoadingConfig load{kCalibratedAnnualCycles, 3};
  AnalysisConfig analysis;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

class Reader {
 public:
  // Visits every key of a mapping, rejecting unknown ones.
  static void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
    if (!node) return;
    if (!node.IsMap()) throw ConfigError(fmt::format("{}: expected a mapping", path.empty() ? "<root>" : path));
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) throw ConfigError(fmt::format("unknown key '{}'", join(path, key)));
    }
  }

  template <class T>
  static void scalar(const YAML::Node& parent, const std::string& path, const char* key, T& out) {
    const YAML::Node n = parent[key];
    if (!n) return;
    try {
      out = n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(fmt::format("{}: invalid value", join(path, key)));
    }
  }

  static void marginal(const YAML::Node& parent, const std::string& path, const char* key,
                       dist::MarginalSpec& out) {
    const YAML::Node n = parent[key];
    if (!n) return;
    const auto p = join(path, key);
    check_keys(n, p, {"m", "sd"});
    scalar(n, p, "m", out.a);
    scalar(n, p, "sd", out.b);
    try {
      out.validate();
    } catch (const InvalidParameter& e) {
      throw ConfigError(fmt::format("{}: {}", p, e.what()));
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

inline DataKind require_kind(const std::string& s, const std::string& path) {
  const auto k = parse_kind(s);
  if (!k) throw ConfigError(fmt::format("{}: unknown data kind '{}' (testing, inspection, shm)", path, s));
  return *k;
}

inline DataSource read_source(const YAML::Node& n, const std::string& path) {
  if (n.IsScalar()) return DataSource::perfect(require_kind(n.as<std::string>(), path));
  Reader::check_keys(n, path, {"kind", "epsilon"});
  if (!n["kind"]) throw ConfigError(fmt::format("{}.kind: missing", path));
  DataSource s = DataSource::perfect(require_kind(n["kind"].as<std::string>(), path + ".kind"));
  if (n["epsilon"] && !n["epsilon"].IsNull()) {
    double eps = 0.0;
    Reader::scalar(n, path, "epsilon", eps);
    if (!(eps > 0.0)) throw ConfigError(fmt::format("{}.epsilon: must be > 0", path));
    s.epsilon = eps;
  }
  return s;
}

template <class Fn>
void rethrow_as_config(const std::string& key, Fn&& fn) {
  try {
    fn();
  } catch (const InvalidParameter& e) {
    throw ConfigError(fmt::format("{}: {}", key, e.what()));
  }
}

}  // namespace detail

/// Resolves a parsed YAML document against the defaults.
inline RunConfig config_from_yaml(const YAML::Node& root) {
  using detail::Reader;
  RunConfig c;
  if (!root || root.IsNull()) return c;
  Reader::check_keys(root, "", {"priors", "costs", "sn", "load", "analysis"});

  if (const auto p = root["priors"]) {
    Reader::check_keys(p, "priors",
                       {"mu_sigma_L", "sd_sigma_L", "alpha_scf", "gamma_scf", "mu_sigma_Y", "sd_sigma_Y", "rho"});
    Reader::marginal(p, "priors", "mu_sigma_L", c.priors.mu_sigma_L);
    Reader::marginal(p, "priors", "sd_sigma_L", c.priors.sd_sigma_L);
    Reader::marginal(p, "priors", "alpha_scf", c.priors.alpha_scf);
    Reader::marginal(p, "priors", "gamma_scf", c.priors.gamma_scf);
    Reader::marginal(p, "priors", "mu_sigma_Y", c.priors.mu_sigma_Y);
    Reader::marginal(p, "priors", "sd_sigma_Y", c.priors.sd_sigma_Y);
    Reader::scalar(p, "priors", "rho", c.priors.rho);
    detail::rethrow_as_config("priors.rho", [&] { c.priors.validate(); });
  }
  if (const auto n = root["costs"]) {
    Reader::check_keys(n, "costs", {"c_fail", "c_repair", "c_replace", "c_reduce", "c_site_visit",
                                    "site_visit_for_reduce"});
    Reader::scalar(n, "costs", "c_fail", c.costs.c_fail);
    Reader::scalar(n, "costs", "c_repair", c.costs.c_repair);
    Reader::scalar(n, "costs", "c_replace", c.costs.c_replace);
    Reader::scalar(n, "costs", "c_reduce", c.costs.c_reduce);
    Reader::scalar(n, "costs", "c_site_visit", c.costs.c_site_visit);
    Reader::scalar(n, "costs", "site_visit_for_reduce", c.costs.site_visit_for_reduce);
    detail::rethrow_as_config("costs", [&] { c.costs.validate(); });
  }
  if (const auto n = root["sn"]) {
    Reader::check_keys(n, "sn", {"log10_a", "slope_m", "scatter_sd"});
    Reader::scalar(n, "sn", "log10_a", c.sn.log10_a);
    Reader::scalar(n, "sn", "slope_m", c.sn.slope_m);
    Reader::scalar(n, "sn", "scatter_sd", c.sn.scatter_sd);
    detail::rethrow_as_config("sn", [&] { c.sn.validate(); });
  }
  if (const auto n = root["load"]) {
    Reader::check_keys(n, "load", {"annual_cycles", "windows"});
    Reader::scalar(n, "load", "annual_cycles", c.load.annual_cycles);
    Reader::scalar(n, "load", "windows", c.load.windows);
    detail::rethrow_as_config("load", [&] { c.load.validate(); });
    if (c.load.windows > 5) throw ConfigError("load.windows: at most 5 windows are supported");
  }
  if (const auto n = root["analysis"]) {
    auto& a = c.analysis;
    Reader::check_keys(n, "analysis",
                       {"mode", "n_samples", "n_inner", "n_outer", "seed", "sources", "sweep_kind", "epsilons",
                        "ess_floor", "max_degenerate_fraction", "workers"});
    if (n["mode"]) {
      const auto m = parse_mode(n["mode"].as<std::string>());
      if (!m) throw ConfigError("analysis.mode: expected one of prior, voi, subsets, sweep, dynamic");
      a.mode = *m;
    }
    Reader::scalar(n, "analysis", "n_samples", a.n_samples);
    Reader::scalar(n, "analysis", "n_inner", a.n_inner);
    Reader::scalar(n, "analysis", "n_outer", a.n_outer);
    Reader::scalar(n, "analysis", "seed", a.seed);
    Reader::scalar(n, "analysis", "ess_floor", a.ess_floor);
    Reader::scalar(n, "analysis", "max_degenerate_fraction", a.max_degenerate_fraction);
    Reader::scalar(n, "analysis", "workers", a.workers);
    if (const auto s = n["sources"]) {
      if (!s.IsSequence()) throw ConfigError("analysis.sources: expected a list");
      a.sources.clear();
      for (std::size_t i = 0; i < s.size(); ++i) {
        a.sources.push_back(detail::read_source(s[i], fmt::format("analysis.sources[{}]", i)));
      }
      detail::rethrow_as_config("analysis.sources", [&] { MeasurementPlan{a.sources}.validate(); });
    }
    if (n["sweep_kind"]) a.sweep_kind = detail::require_kind(n["sweep_kind"].as<std::string>(), "analysis.sweep_kind");
    if (const auto e = n["epsilons"]) {
      if (!e.IsSequence()) throw ConfigError("analysis.epsilons: expected a list");
      a.epsilons.clear();
      for (std::size_t i = 0; i < e.size(); ++i) {
        double v = 0.0;
        try {
          v = e[i].as<double>();
        } catch (const YAML::Exception&) {
          throw ConfigError(fmt::format("analysis.epsilons[{}]: invalid value", i));
        }
        a.epsilons.push_back(v);
      }
    }
    for (std::size_t i = 0; i < a.epsilons.size(); ++i) {
      if (!(a.epsilons[i] > 0.0)) throw ConfigError("analysis.epsilons: values must be > 0");
      if (i > 0 && !(a.epsilons[i] > a.epsilons[i - 1])) throw ConfigError("analysis.epsilons: must ascend");
    }
    if (a.n_samples < 1) throw ConfigError("analysis.n_samples: must be >= 1");
    if (a.n_inner < 1) throw ConfigError("analysis.n_inner: must be >= 1");
    if (a.n_outer < 1) throw ConfigError("analysis.n_outer: must be >= 1");
    if (!(a.ess_floor >= 1.0)) throw ConfigError("analysis.ess_floor: must be >= 1");
    if (!(a.max_degenerate_fraction >= 0.0 && a.max_degenerate_fraction <= 1.0)) {
      throw ConfigError("analysis.max_degenerate_fraction: must lie in [0, 1]");
    }
  }
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("parse error at line {}, column {}: {}", e.mark.line + 1, e.mark.column + 1, e.msg));
  }
  try {
    return config_from_yaml(root);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("invalid config at line {}, column {}: {}", e.mark.line + 1, e.mark.column + 1,
                                  e.msg));
  }
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

/// Fully resolved config as YAML. Numbers use the shortest round-trip form,
/// so parse_config(to_yaml(c)) == c.
inline std::string to_yaml(const RunConfig& c) {
  std::string out;
  auto m = [&](const char* key, const dist::MarginalSpec& s) {
    out += fmt::format("  {}: {{m: {}, sd: {}}}\n", key, s.a, s.b);
  };
  out += "priors:\n";
  m("mu_sigma_L", c.priors.mu_sigma_L);
  m("sd_sigma_L", c.priors.sd_sigma_L);
  m("alpha_scf", c.priors.alpha_scf);
  m("gamma_scf", c.priors.gamma_scf);
  m("mu_sigma_Y", c.priors.mu_sigma_Y);
  m("sd_sigma_Y", c.priors.sd_sigma_Y);
  out += fmt::format("  rho: {}\n", c.priors.rho);
  out += "costs:\n";
  out += fmt::format("  c_fail: {}\n  c_repair: {}\n  c_replace: {}\n  c_reduce: {}\n  c_site_visit: {}\n",
                     c.costs.c_fail, c.costs.c_repair, c.costs.c_replace, c.costs.c_reduce, c.costs.c_site_visit);
  out += fmt::format("  site_visit_for_reduce: {}\n", c.costs.site_visit_for_reduce);
  out += "sn:\n";
  out += fmt::format("  log10_a: {}\n  slope_m: {}\n  scatter_sd: {}\n", c.sn.log10_a, c.sn.slope_m, c.sn.scatter_sd);
  out += "load:\n";
  out += fmt::format("  annual_cycles: {}\n  windows: {}\n", c.load.annual_cycles, c.load.windows);
  const auto& a = c.analysis;
  out += "analysis:\n";
  out += fmt::format("  mode: {}\n  n_samples: {}\n  n_inner: {}\n  n_outer: {}\n  seed: {}\n", to_string(a.mode),
                     a.n_samples, a.n_inner, a.n_outer, a.seed);
  out += "  sources:\n";
  if (a.sources.empty()) out.replace(out.size() - 1, 1, " []\n");
  for (const auto& s : a.sources) {
    if (s.is_perfect()) {
      out += fmt::format("    - {{kind: {}}}\n", to_string(s.kind));
    } else {
      out += fmt::format("    - {{kind: {}, epsilon: {}}}\n", to_string(s.kind), *s.epsilon);
    }
  }
  out += fmt::format("  sweep_kind: {}\n", to_string(a.sweep_kind));
  out += "  epsilons: [";
  for (std::size_t i = 0; i < a.epsilons.size(); ++i) out += fmt::format("{}{}", i ? ", " : "", a.epsilons[i]);
  out += "]\n";
  out += fmt::format("  ess_floor: {}\n  max_degenerate_fraction: {}\n  workers: {}\n", a.ess_floor,
                     a.max_degenerate_fraction, a.workers);
  return out;
}

/// 64-bit FNV-1a, used to fingerprint resolved configs in result records.
inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace voi::cli

#endif  // VOI_CLI_CONFIG_HPP
