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

#ifndef VOI_DYNAMIC_PLANNER_HPP
#define VOI_DYNAMIC_PLANNER_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "voi/decision_core.hpp"
#include "voi/errors.hpp"
#include "voi/structural_model.hpp"
#include "voi/voi_engine.hpp"

namespace voi {

// Rules carried between windows:
//  * replacement and reduced operation persist once taken;
//  * a repair strengthens the joint for the window it is bought in only;
//  * Miner damage accumulates and failure (over-stress or damage >= 1) is
//    absorbing: the failure cost is charged once, later windows cost nothing;
//  * every window's actions are charged by the single-window cost rules;
//  * no discounting.

inline constexpr std::size_t kMaxWindows = 5;

/// One action set per maintenance window.
struct PolicySequence {
  std::vector<ActionSet> actions;

  /// Base-8 index with the first window most significant.
  std::size_t index() const {
    std::size_t i = 0;
    for (const auto& a : actions) i = i * ActionSet::kCount + a.index();
    return i;
  }
  static PolicySequence from_index(std::size_t index, std::size_t windows) {
    PolicySequence s;
    s.actions.resize(windows);
    for (std::size_t w = windows; w-- > 0;) {
      s.actions[w] = ActionSet::from_index(index % ActionSet::kCount);
      index /= ActionSet::kCount;
    }
    return s;
  }
  std::string label() const {
    std::string out;
    for (const auto& a : actions) {
      if (!out.empty()) out += " | ";
      out += a.label();
    }
    return out;
  }
  bool operator==(const PolicySequence&) const = default;
};

struct SystemState {
  double accumulated_damage = 0.0;
  bool repaired = false;  // repair active in the current window
  bool replaced = false;
  bool reduced = false;
};

struct RolloutResult {
  std::vector<bool> failed;     // failure occurred in window k
  std::vector<SystemState> states;
  std::optional<std::size_t> failure_window;
  double mitigation_cost = 0.0;
  double total_cost = 0.0;
};

inline std::size_t sequence_count(std::size_t windows) {
  std::size_t n = 1;
  for (std::size_t w = 0; w < windows; ++w) n *= ActionSet::kCount;
  return n;
}

namespace detail {

inline SystemState advance(SystemState st, ActionSet a) {
  st.repaired = a.repair;
  st.replaced = st.replaced || a.replace;
  st.reduced = st.reduced || a.reduce_operation;
  return st;
}

/// Over-stress flag and per-window damage increment for a state's effective actions.
struct WindowEffect {
  bool overstress = false;
  double damage = 0.0;
};

inline WindowEffect window_effect(const ParameterSample& s, const SystemState& st, const SnModel& sn,
                                  const LoadingConfig& load) {
  const ActionSet effective{st.repaired, st.replaced, st.reduced};
  const double stress = effective_peak_stress(apply_actions(s, effective));
  const double cycles = load.annual_cycles * cycle_factor(effective);
  return {stress > s.sigma_Y, fatigue_damage(stress, cycles, sn, s.u_scatter)};
}

}  // namespace detail

/// Simulates one sample through the windows of `seq`.
inline RolloutResult rollout(const PolicySequence& seq, const ParameterSample& s, const SnModel& sn,
                             const LoadingConfig& load, const CostModel& cost) {
  if (seq.actions.empty()) throw InvalidParameter("rollout: empty policy sequence");
  RolloutResult r;
  SystemState st;
  for (std::size_t w = 0; w < seq.actions.size(); ++w) {
    if (r.failure_window) {
      r.failed.push_back(false);
      r.states.push_back(st);
      continue;
    }
    st = detail::advance(st, seq.actions[w]);
    r.mitigation_cost += mitigation_cost(seq.actions[w], cost);
    const auto eff = detail::window_effect(s, st, sn, load);
    st.accumulated_damage += eff.damage;
    const bool fail = eff.overstress || st.accumulated_damage >= 1.0;
    r.failed.push_back(fail);
    r.states.push_back(st);
    if (fail) r.failure_window = w;
  }
  r.total_cost = r.mitigation_cost + (r.failure_window ? cost.c_fail : 0.0);
  return r;
}

struct DynamicSolution {
  std::size_t windows = 1;
  PolicySequence best;
  double expected_cost = 0.0;
  std::vector<double> expected_costs;  // per sequence index
  std::vector<double> pr_fail;         // per sequence index, any window
};

namespace detail {

/// Accumulates, per sequence and window, the weight of samples that first fail in that window.
class FailureWindowTable {
 public:
  explicit FailureWindowTable(std::size_t windows)
      : windows_(windows), n_seq_(sequence_count(windows)), mass_(n_seq_ * windows, 0.0) {}

  void add(const ParameterSample& s, double w, const SnModel& sn, const LoadingConfig& load) {
    total_ += w;
    if (w == 0.0) return;
    // Effects depend only on (repair active, replaced, reduced): eight states.
    std::array<WindowEffect, 8> effect;
    for (std::size_t e = 0; e < 8; ++e) {
      const ActionSet a = ActionSet::from_index(e);
      effect[e] = window_effect(s, SystemState{0.0, a.repair, a.replace, a.reduce_operation}, sn, load);
    }
    descend(effect, 0, 0, false, false, 0.0, w);
  }

  double total() const { return total_; }
  double mass(std::size_t seq, std::size_t window) const { return mass_[seq * windows_ + window]; }

 private:
  void descend(const std::array<WindowEffect, 8>& effect, std::size_t window, std::size_t prefix, bool replaced,
               bool reduced, double damage, double w) {
    const std::size_t leaves_below = sequence_count(windows_ - window - 1);
    for (std::size_t ai = 0; ai < ActionSet::kCount; ++ai) {
      const ActionSet a = ActionSet::from_index(ai);
      const bool rep = replaced || a.replace;
      const bool red = reduced || a.reduce_operation;
      const std::size_t state = ActionSet{a.repair, rep, red}.index();
      const double dmg = damage + effect[state].damage;
      const std::size_t seq = prefix * ActionSet::kCount + ai;
      if (effect[state].overstress || dmg >= 1.0) {
        const std::size_t first = seq * leaves_below;
        for (std::size_t leaf = first; leaf < first + leaves_below; ++leaf) mass_[leaf * windows_ + window] += w;
      } else if (window + 1 < windows_) {
        descend(effect, window + 1, seq, rep, red, dmg, w);
      }
    }
  }

  std::size_t windows_;
  std::size_t n_seq_;
  std::vector<double> mass_;
  double total_ = 0.0;
};

inline DynamicSolution finish(const FailureWindowTable& table, std::size_t windows, const CostModel& cost) {
  const std::size_t n_seq = sequence_count(windows);
  DynamicSolution sol;
  sol.windows = windows;
  sol.expected_costs.resize(n_seq);
  sol.pr_fail.resize(n_seq);
  const double total = table.total();
  if (!(total > 0.0)) throw InvalidParameter("solve_dynamic: weights sum to zero");
  std::size_t best = 0;
  double best_nominal = 0.0;
  for (std::size_t q = 0; q < n_seq; ++q) {
    const auto seq = PolicySequence::from_index(q, windows);
    double failed_mass = 0.0, cost_sum = 0.0, nominal = 0.0;
    for (std::size_t w = 0; w < windows; ++w) {
      const double m = mitigation_cost(seq.actions[w], cost);
      nominal += m;
      cost_sum += m * (1.0 - failed_mass / total);
      failed_mass += table.mass(q, w);
    }
    const double p = failed_mass / total;
    sol.pr_fail[q] = p;
    sol.expected_costs[q] = cost_sum + p * cost.c_fail;
    if (q == 0 || sol.expected_costs[q] < sol.expected_costs[best] ||
        (sol.expected_costs[q] == sol.expected_costs[best] && nominal < best_nominal)) {
      best = q;
      best_nominal = nominal;
    }
  }
  sol.best = PolicySequence::from_index(best, windows);
  sol.expected_cost = sol.expected_costs[best];
  return sol;
}

}  // namespace detail

/// Exhaustive search over all 8^windows action sequences on a (weighted) sample set.
inline DynamicSolution solve_dynamic(std::span<const ParameterSample> samples, std::span<const double> weights,
                                     const CostModel& cost, const SnModel& sn, const LoadingConfig& load) {
  load.validate();
  if (load.windows > kMaxWindows) throw InvalidParameter("dynamic planning supports at most 5 windows");
  if (samples.empty()) throw InvalidParameter("solve_dynamic: no samples");
  detail::FailureWindowTable table(load.windows);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    table.add(samples[i], weights.empty() ? 1.0 : weights[i], sn, load);
  }
  return detail::finish(table, load.windows, cost);
}

inline DynamicSolution solve_dynamic(const DecisionProblem& p) {
  p.validate();
  return solve_dynamic(p.samples, {}, p.cost, p.sn, p.load);
}

/// Number of outer draws for which each policy sequence was optimal.
struct PathFrequencyTable {
  std::size_t windows = 1;
  std::map<std::size_t, std::size_t> counts;  // sequence index -> count

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& [k, v] : counts) n += v;
    return n;
  }
};

/// Preposterior value of one data source for the multi-window plan, with the
/// frequency of each optimal action path.
inline std::pair<VoiResult, PathFrequencyTable> dynamic_voi(const DataSource& src, const DecisionProblem& problem,
                                                            const VoiOptions& options) {
  problem.validate();
  const DynamicSolution prior = solve_dynamic(problem);
  const std::size_t prior_choice = prior.best.index();
  const MeasurementPlan plan{{src}};
  auto inner = [&](std::span<const ParameterSample> samples, std::span<const double> weights) {
    const auto sol = solve_dynamic(samples, weights, problem.cost, problem.sn, problem.load);
    return InnerOutcome{-sol.expected_cost, -sol.expected_costs[prior_choice], sol.best.index()};
  };
  VoiResult r = preposterior(plan, problem, OuterDraws::make(problem, options), options, -prior.expected_cost,
                             prior_choice, inner);
  PathFrequencyTable table;
  table.windows = problem.load.windows;
  for (const auto& d : r.draws) ++table.counts[d.choice];
  return {std::move(r), std::move(table)};
}

}  // namespace voi

#endif  // VOI_DYNAMIC_PLANNER_HPP
