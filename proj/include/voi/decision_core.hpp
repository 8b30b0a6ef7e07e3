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

#ifndef VOI_DECISION_CORE_HPP
#define VOI_DECISION_CORE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "voi/errors.hpp"
#include "voi/structural_model.hpp"

namespace voi {

/// Normalised costs; failure defaults to 1.
///
/// The site visit is charged once when any physical work (repair or replace)
/// is done. `site_visit_for_reduce` extends that to reduced operation alone.
struct CostModel {
  double c_fail = 1.0;
  double c_repair = 0.025;
  double c_replace = 0.075;
  double c_reduce = 0.05;
  double c_site_visit = 0.01;
  bool site_visit_for_reduce = false;

  void validate() const {
    for (double c : {c_fail, c_repair, c_replace, c_reduce, c_site_visit}) {
      if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidParameter("costs must be finite and >= 0");
    }
  }
  bool operator==(const CostModel&) const = default;
};

inline double mitigation_cost(ActionSet a, const CostModel& c) {
  double total = 0.0;
  if (a.repair) total += c.c_repair;
  if (a.replace) total += c.c_replace;
  if (a.reduce_operation) total += c.c_reduce;
  if (a.repair || a.replace || (a.reduce_operation && c.site_visit_for_reduce)) total += c.c_site_visit;
  return total;
}

/// Everything needed to solve the single-window decision.
///
/// `samples` is the Monte Carlo representation of the prior; `priors` is kept
/// so that preposterior analyses can draw fresh outer samples from it.
struct DecisionProblem {
  PriorConfig priors;
  std::vector<ParameterSample> samples;
  CostModel cost;
  SnModel sn;
  LoadingConfig load;

  void validate() const {
    if (samples.empty()) throw InvalidParameter("decision problem has no samples");
    priors.validate();
    cost.validate();
    sn.validate();
    load.validate();
  }
};

struct ActionRow {
  ActionSet action;
  double pr_fail = 0.0;
  double pr_fail_se = 0.0;
  double mitigation_cost = 0.0;
  double expected_utility = 0.0;
};

struct DecisionResult {
  std::array<ActionRow, ActionSet::kCount> table;
  ActionSet a_star;
  double e_u_star = 0.0;
  double effective_n = 0.0;

  const ActionRow& row(ActionSet a) const { return table[a.index()]; }
};

/// Row order of the published prior decision table (replace + reduce is not listed there).
inline constexpr std::array<std::size_t, 7> kReportOrder = {0, 1, 4, 2, 5, 3, 7};

inline double utility_from(double pr_fail, double mitigation, const CostModel& c) {
  return -(pr_fail * c.c_fail) - mitigation;
}

/// Index of the best action: highest utility, then cheaper mitigation, then lowest index.
inline std::size_t select_best(std::span<const double> utilities, std::span<const double> mitigation) {
  if (utilities.empty() || utilities.size() != mitigation.size()) {
    throw InvalidParameter("select_best: mismatched or empty tables");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < utilities.size(); ++i) {
    if (utilities[i] > utilities[best] ||
        (utilities[i] == utilities[best] && mitigation[i] < mitigation[best])) {
      best = i;
    }
  }
  return best;
}

/// Builds the decision table from per-action failure probabilities.
inline DecisionResult decide(const std::array<FailureEstimate, ActionSet::kCount>& failure,
                             const CostModel& cost) {
  DecisionResult r;
  std::array<double, ActionSet::kCount> u{}, m{};
  for (std::size_t i = 0; i < ActionSet::kCount; ++i) {
    const ActionSet a = ActionSet::from_index(i);
    m[i] = mitigation_cost(a, cost);
    u[i] = utility_from(failure[i].probability, m[i], cost);
    r.table[i] = {a, failure[i].probability, failure[i].standard_error, m[i], u[i]};
  }
  const std::size_t best = select_best(u, m);
  r.a_star = ActionSet::from_index(best);
  r.e_u_star = u[best];
  r.effective_n = failure[0].effective_n;
  return r;
}

/// Weighted failure frequencies of all eight actions from precomputed failure masks.
inline std::array<FailureEstimate, ActionSet::kCount> failure_table(std::span<const std::uint8_t> masks,
                                                                     std::span<const double> weights = {}) {
  if (masks.empty()) throw InvalidParameter("pr_fail: no samples");
  std::array<double, ActionSet::kCount> hit{};
  double total = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    total += w;
    sq += w * w;
    const std::uint8_t mask = masks[i];
    if (mask == 0) continue;
    for (std::size_t a = 0; a < ActionSet::kCount; ++a) {
      if (mask & (1U << a)) hit[a] += w;
    }
  }
  if (!(total > 0.0)) throw InvalidParameter("pr_fail: weights sum to zero");
  const double ess = total * total / sq;
  std::array<FailureEstimate, ActionSet::kCount> out{};
  for (std::size_t a = 0; a < ActionSet::kCount; ++a) {
    const double p = hit[a] / total;
    out[a] = {p, std::sqrt(p * (1.0 - p) / ess), ess};
  }
  return out;
}

inline std::vector<std::uint8_t> failure_masks(std::span<const ParameterSample> samples, const SnModel& sn,
                                               const LoadingConfig& load) {
  std::vector<std::uint8_t> masks(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) masks[i] = failure_mask(samples[i], sn, load);
  return masks;
}

/// The single upcoming window: always one window of cycles, whatever load.windows says.
inline LoadingConfig single_window(const LoadingConfig& load) { return {load.annual_cycles, 1}; }

/// Solves the single-window problem on a (possibly weighted) sample set.
/// All actions are scored on the same samples.
inline DecisionResult solve(std::span<const ParameterSample> samples, std::span<const double> weights,
                            const CostModel& cost, const SnModel& sn, const LoadingConfig& load) {
  const auto masks = failure_masks(samples, sn, single_window(load));
  return decide(failure_table(masks, weights), cost);
}

inline DecisionResult solve(const DecisionProblem& p) {
  p.validate();
  return solve(p.samples, {}, p.cost, p.sn, p.load);
}

/// E[u] = -Pr(fail) * c_fail - mitigation cost.
inline double expected_utility(ActionSet a, const DecisionProblem& p) {
  const auto f = pr_fail(p.samples, a, p.sn, single_window(p.load));
  return utility_from(f.probability, mitigation_cost(a, p.cost), p.cost);
}

}  // namespace voi

#endif  // VOI_DECISION_CORE_HPP
