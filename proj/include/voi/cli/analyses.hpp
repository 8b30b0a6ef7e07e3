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

#ifndef VOI_CLI_ANALYSES_HPP
#define VOI_CLI_ANALYSES_HPP

#include <array>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "voi/cli/config.hpp"
#include "voi/cli/reporting.hpp"
#include "voi/decision_core.hpp"
#include "voi/dynamic_planner.hpp"
#include "voi/structural_model.hpp"
#include "voi/voi_engine.hpp"

namespace voi::cli {

namespace detail {

inline DecisionProblem problem_for(const RunConfig& c, std::size_t n) {
  return {c.priors, draw_parameter_samples(n, c.analysis.seed, c.priors), c.costs, c.sn, c.load};
}

inline VoiOptions options_for(const RunConfig& c) {
  VoiOptions o;
  o.n_outer = c.analysis.n_outer;
  o.seed = c.analysis.seed;
  o.ess_floor = c.analysis.ess_floor;
  o.max_degenerate_fraction = c.analysis.max_degenerate_fraction;
  o.workers = c.analysis.workers;
  return o;
}

inline ResultRecord start(const std::string& kind, const RunConfig& c) {
  ResultRecord r;
  r.kind = kind;
  r.config = c;
  r.timestamp = utc_timestamp();
  return r;
}

inline const std::vector<std::string>& voi_header() {
  static const std::vector<std::string> h = {"plan", "e_u_prior", "e_u_preposterior", "voi", "standard_error",
                                             "n_outer", "n_fallback", "n_degenerate", "min_ess"};
  return h;
}

inline std::vector<std::string> voi_row(const VoiResult& v) {
  return {v.plan, num(v.e_u_prior), num(v.e_u_preposterior), num(v.voi), num(v.mc_standard_error),
          num(v.n_outer), num(v.n_fallback), num(v.n_degenerate), num(v.min_ess)};
}

inline nlohmann::json voi_json(const VoiResult& v) {
  return {{"plan", v.plan},
          {"e_u_prior", v.e_u_prior},
          {"e_u_preposterior", v.e_u_preposterior},
          {"voi", v.voi},
          {"standard_error", v.mc_standard_error},
          {"n_outer", v.n_outer},
          {"n_fallback", v.n_fallback},
          {"n_degenerate", v.n_degenerate},
          {"min_ess", v.min_ess}};
}

/// Per outer draw: hypothesised measurements, inner expected cost and chosen action.
template <class ChoiceLabel>
Table scatter_table(const std::string& name, const VoiResult& v, ChoiceLabel&& label) {
  Table t{name, {"draw", "z_testing", "z_inspection", "z_shm", "inner_expected_cost", "chosen"}, {}};
  t.rows.reserve(v.draws.size());
  for (std::size_t k = 0; k < v.draws.size(); ++k) {
    const auto& d = v.draws[k];
    t.rows.push_back({num(k), num(d.z[0]), num(d.z[1]), num(d.z[2]), num(-d.inner_e_u), label(d.choice)});
  }
  return t;
}

inline std::string action_label(std::size_t i) { return ActionSet::from_index(i).label(); }

inline std::string voi_line(const VoiResult& v) {
  return fmt::format("{:<22} VoI = {:.5f}  (SE {:.5f}, fallback {}, degenerate {})", v.plan, v.voi,
                     v.mc_standard_error, v.n_fallback, v.n_degenerate);
}

}  // namespace detail

/// Prior decision analysis: failure probability and expected cost of every action.
inline ResultRecord run_prior(const RunConfig& c) {
  auto rec = detail::start("prior", c);
  const auto problem = detail::problem_for(c, c.analysis.n_samples);
  const DecisionResult d = solve(problem);

  Table t{"prior_decision",
          {"action", "pr_fail", "pr_fail_se", "beta", "mitigation_cost", "expected_cost", "optimal"},
          {}};
  nlohmann::json rows = nlohmann::json::array();
  rec.summary.push_back(fmt::format("{:<40} {:>9} {:>7} {:>10} {:>10}", "action", "Pr(fail)", "beta", "mitigation",
                                    "E[cost]"));
  for (std::size_t i : kReportOrder) {
    const auto& row = d.table[i];
    const bool best = row.action == d.a_star;
    t.rows.push_back({row.action.label(), num(row.pr_fail), num(row.pr_fail_se), num(pr_to_beta(row.pr_fail)),
                      num(row.mitigation_cost), num(-row.expected_utility), best ? "1" : "0"});
    rec.summary.push_back(fmt::format("{:<40} {:>9.4f} {:>7.3f} {:>10.4f} {:>10.4f}{}", row.action.label(),
                                      row.pr_fail, pr_to_beta(row.pr_fail), row.mitigation_cost,
                                      -row.expected_utility, best ? "  <- optimal" : ""));
  }
  for (const auto& row : d.table) {
    rows.push_back({{"action", row.action.label()},
                    {"pr_fail", row.pr_fail},
                    {"pr_fail_se", row.pr_fail_se},
                    {"mitigation_cost", row.mitigation_cost},
                    {"expected_cost", -row.expected_utility}});
  }
  rec.payload = {{"n_samples", problem.samples.size()},
                 {"optimal_action", d.a_star.label()},
                 {"expected_cost", -d.e_u_star},
                 {"actions", rows}};
  rec.tables.push_back(std::move(t));
  return rec;
}

/// Preposterior value of the configured measurement plan.
inline ResultRecord run_voi(const RunConfig& c) {
  auto rec = detail::start("voi", c);
  const auto problem = detail::problem_for(c, c.analysis.n_inner);
  const MeasurementPlan plan{c.analysis.sources};
  const VoiResult v = voi(plan, problem, detail::options_for(c));
  rec.payload = detail::voi_json(v);
  rec.payload["prior_choice"] = detail::action_label(v.prior_choice);
  rec.tables.push_back({"voi", detail::voi_header(), {detail::voi_row(v)}});
  rec.plots.push_back(detail::scatter_table("fig_preposterior", v, detail::action_label));
  rec.summary.push_back(fmt::format("prior-optimal action: {}  (expected cost {:.5f})",
                                    detail::action_label(v.prior_choice), -v.e_u_prior));
  rec.summary.push_back(detail::voi_line(v));
  return rec;
}

/// Perfect-information VoI of every subset of the three data sources.
inline ResultRecord run_subsets(const RunConfig& c) {
  auto rec = detail::start("subsets", c);
  const auto problem = detail::problem_for(c, c.analysis.n_inner);
  const auto all = voi_all_subsets(problem, detail::options_for(c));

  Table t{"voi_subsets", detail::voi_header(), {}};
  Table fig{"fig_subsets", {"subset", "voi", "standard_error"}, {}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& v : all) {
    t.rows.push_back(detail::voi_row(v));
    fig.rows.push_back({v.plan, num(v.voi), num(v.mc_standard_error)});
    rows.push_back(detail::voi_json(v));
    rec.summary.push_back(detail::voi_line(v));
  }
  // Inspection (bit 1) + SHM (bit 2) against the pair observed together.
  const std::array<const VoiResult*, 3> parts = {&all[2], &all[4], &all[6]};
  const std::array<double, 3> signs = {1.0, 1.0, -1.0};
  const double gap = all[2].voi + all[4].voi - all[6].voi;
  const double gap_se = paired_standard_error(parts, signs);
  rec.summary.push_back(fmt::format("VoI(Insp) + VoI(SHM) - VoI(Insp+SHM) = {:.5f}  (paired SE {:.5f})", gap, gap_se));
  rec.payload = {{"subsets", rows}, {"insp_shm_gap", gap}, {"insp_shm_gap_se", gap_se}};
  rec.tables.push_back(std::move(t));
  rec.plots.push_back(std::move(fig));
  return rec;
}

/// VoI of one imprecise data source across the configured measurement errors.
inline ResultRecord run_sweep(const RunConfig& c) {
  auto rec = detail::start("sweep", c);
  const auto problem = detail::problem_for(c, c.analysis.n_inner);
  const auto points = voi_sensitivity(c.analysis.sweep_kind, c.analysis.epsilons, problem, detail::options_for(c));

  auto header = detail::voi_header();
  header.insert(header.begin(), "epsilon");
  Table t{"voi_sweep", header, {}};
  Table fig{"fig_sweep", {"epsilon", "voi", "standard_error"}, {}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& p : points) {
    auto row = detail::voi_row(p.result);
    row.insert(row.begin(), num(p.epsilon));
    t.rows.push_back(std::move(row));
    fig.rows.push_back({num(p.epsilon), num(p.result.voi), num(p.result.mc_standard_error)});
    auto j = detail::voi_json(p.result);
    j["epsilon"] = p.epsilon;
    rows.push_back(j);
    rec.summary.push_back(detail::voi_line(p.result));
  }
  rec.payload = {{"kind", to_string(c.analysis.sweep_kind)}, {"points", rows}};
  rec.tables.push_back(std::move(t));
  rec.plots.push_back(std::move(fig));
  return rec;
}

/// Multi-window planning: prior-optimal action sequence and the preposterior
/// value of the first configured data source.
inline ResultRecord run_dynamic(const RunConfig& c) {
  auto rec = detail::start("dynamic", c);
  if (c.analysis.sources.size() != 1) throw AnalysisError("dynamic analysis needs exactly one data source");
  const std::size_t windows = c.load.windows;
  auto seq_label = [windows](std::size_t i) { return PolicySequence::from_index(i, windows).label(); };

  const auto prior_problem = detail::problem_for(c, c.analysis.n_samples);
  const DynamicSolution prior = solve_dynamic(prior_problem);
  Table policies{"dynamic_policies", {"sequence", "expected_cost", "pr_fail", "optimal"}, {}};
  for (std::size_t q = 0; q < prior.expected_costs.size(); ++q) {
    policies.rows.push_back({seq_label(q), num(prior.expected_costs[q]), num(prior.pr_fail[q]),
                             q == prior.best.index() ? "1" : "0"});
  }
  rec.summary.push_back(fmt::format("prior-optimal {}-window sequence: {}  (expected cost {:.5f}, Pr(fail) {:.4f})",
                                    windows, prior.best.label(), prior.expected_cost,
                                    prior.pr_fail[prior.best.index()]));

  const auto problem = detail::problem_for(c, c.analysis.n_inner);
  const auto [v, paths] = dynamic_voi(c.analysis.sources.front(), problem, detail::options_for(c));
  rec.summary.push_back(detail::voi_line(v));

  Table path_table{"fig_paths", {"sequence", "count"}, {}};
  nlohmann::json path_json = nlohmann::json::array();
  for (const auto& [seq, count] : paths.counts) {
    path_table.rows.push_back({seq_label(seq), num(count)});
    path_json.push_back({{"sequence", seq_label(seq)}, {"count", count}});
    rec.summary.push_back(fmt::format("  {:>6} x  {}", count, seq_label(seq)));
  }
  rec.payload = {{"windows", windows},
                 {"prior_sequence", prior.best.label()},
                 {"prior_expected_cost", prior.expected_cost},
                 {"voi", detail::voi_json(v)},
                 {"inner_prior_sequence", seq_label(v.prior_choice)},
                 {"paths", path_json}};
  rec.tables.push_back(std::move(policies));
  rec.tables.push_back({"dynamic_voi", detail::voi_header(), {detail::voi_row(v)}});
  rec.plots.push_back(detail::scatter_table("fig_dynamic_preposterior", v, seq_label));
  rec.plots.push_back(std::move(path_table));
  return rec;
}

/// Cycles per window that reproduce a target no-action failure probability.
inline ResultRecord run_calibrate(const RunConfig& c, double target) {
  auto rec = detail::start("calibrate", c);
  const auto samples = draw_parameter_samples(c.analysis.n_samples, c.analysis.seed, c.priors);
  const double cycles = calibrate_annual_cycles(samples, c.sn, target);
  const auto check = pr_fail(samples, ActionSet{}, c.sn, LoadingConfig{cycles, 1});
  rec.payload = {{"target", target}, {"annual_cycles", cycles}, {"pr_fail", check.probability}};
  rec.tables.push_back({"calibration", {"target", "annual_cycles", "pr_fail"},
                        {{num(target), num(cycles), num(check.probability)}}});
  rec.summary.push_back(fmt::format("annual_cycles = {}  (no-action Pr(fail) {:.5f}, target {})", cycles,
                                    check.probability, target));
  return rec;
}

inline ResultRecord run(const RunConfig& c) {
  switch (c.analysis.mode) {
    case Mode::Prior: return run_prior(c);
    case Mode::Voi: return run_voi(c);
    case Mode::Subsets: return run_subsets(c);
    case Mode::Sweep: return run_sweep(c);
    case Mode::Dynamic: return run_dynamic(c);
  }
  throw AnalysisError("unknown analysis mode");
}

}  // namespace voi::cli

#endif  // VOI_CLI_ANALYSES_HPP
