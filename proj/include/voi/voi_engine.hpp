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

#ifndef VOI_VOI_ENGINE_HPP
#define VOI_VOI_ENGINE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voi/decision_core.hpp"
#include "voi/distributions.hpp"
#include "voi/errors.hpp"
#include "voi/parallel.hpp"
#include "voi/random.hpp"
#include "voi/structural_model.hpp"

namespace voi {

/// What a data-collection activity observes: testing sees yield strength,
/// inspection sees the stress concentration factor, SHM sees applied stress.
enum class DataKind : std::size_t { Testing = 0, Inspection = 1, Shm = 2 };

inline constexpr std::array<DataKind, 3> kAllKinds = {DataKind::Testing, DataKind::Inspection, DataKind::Shm};

inline const char* to_string(DataKind k) {
  switch (k) {
    case DataKind::Testing: return "testing";
    case DataKind::Inspection: return "inspection";
    case DataKind::Shm: return "shm";
  }
  return "?";
}

inline const char* short_label(DataKind k) {
  switch (k) {
    case DataKind::Testing: return "Test";
    case DataKind::Inspection: return "Insp";
    case DataKind::Shm: return "SHM";
  }
  return "?";
}

/// A data source with either perfect or additive Gaussian measurement error.
struct DataSource {
  DataKind kind = DataKind::Shm;
  std::optional<double> epsilon;  // sd of the measurement error; empty when perfect

  static DataSource perfect(DataKind k) { return {k, std::nullopt}; }
  static DataSource gaussian(DataKind k, double eps) { return {k, eps}; }

  bool is_perfect() const { return !epsilon.has_value(); }

  void validate() const {
    if (epsilon && !(*epsilon > 0.0 && std::isfinite(*epsilon))) {
      throw InvalidParameter("measurement epsilon must be finite and > 0");
    }
  }
  bool operator==(const DataSource&) const = default;
};

struct MeasurementPlan {
  std::vector<DataSource> sources;

  static MeasurementPlan perfect_subset(unsigned kinds_mask) {
    MeasurementPlan p;
    for (DataKind k : kAllKinds) {
      if (kinds_mask & (1U << static_cast<std::size_t>(k))) p.sources.push_back(DataSource::perfect(k));
    }
    return p;
  }

  const DataSource* find(DataKind k) const {
    for (const auto& s : sources) {
      if (s.kind == k) return &s;
    }
    return nullptr;
  }

  void validate() const {
    unsigned seen = 0;
    for (const auto& s : sources) {
      s.validate();
      const unsigned bit = 1U << static_cast<std::size_t>(s.kind);
      if (seen & bit) throw InvalidParameter("measurement plan lists a data kind twice");
      seen |= bit;
    }
  }

  /// e.g. "Insp+SHM", "SHM(eps=5)", or "none".
  std::string label() const {
    if (sources.empty()) return "none";
    std::string out;
    for (DataKind k : kAllKinds) {
      const auto* s = find(k);
      if (!s) continue;
      if (!out.empty()) out += "+";
      out += short_label(k);
      if (!s->is_perfect()) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "(eps=%g)", *s->epsilon);
        out += buf;
      }
    }
    return out;
  }
};

/// The true value of the quantity a data kind observes.
inline double observed_quantity(const ParameterSample& s, DataKind k) {
  switch (k) {
    case DataKind::Testing: return s.sigma_Y;
    case DataKind::Inspection: return s.scf;
    case DataKind::Shm: return s.sigma_L;
  }
  return 0.0;
}

/// Simulated measurement of sample s: the true value, plus eps * Phi^-1(u) when imperfect.
inline double hypothesize_measurement(const ParameterSample& s, const DataSource& src, double u) {
  const double truth = observed_quantity(s, src.kind);
  if (src.is_perfect()) return truth;
  return truth + *src.epsilon * dist::normal_quantile(u);
}

/// Exactly observed values, one slot per data kind.
struct Observation {
  std::array<std::optional<double>, 3> value;

  std::optional<double>& operator[](DataKind k) { return value[static_cast<std::size_t>(k)]; }
  const std::optional<double>& operator[](DataKind k) const { return value[static_cast<std::size_t>(k)]; }
  bool empty() const { return !value[0] && !value[1] && !value[2]; }
};

/// Inner sample set after conditioning. Weights are unnormalised; empty means equal.
struct ConditionedSet {
  std::vector<ParameterSample> samples;
  std::vector<double> weights;
  double ess = 0.0;
};

inline double effective_sample_size(std::span<const double> weights) {
  double total = 0.0, sq = 0.0;
  for (double w : weights) {
    total += w;
    sq += w * w;
  }
  return sq > 0.0 ? total * total / sq : 0.0;
}

namespace detail {

/// Pins the observed quantities of one sample and returns its weight.
///
/// The weight is the density of the observation under the sample's own
/// hyperparameters, so the weighted set represents the hyperparameter
/// posterior. When only one of (SCF, sigma_Y) is observed, the other is redrawn
/// from the copula conditional, reusing the sample's own independent latent
/// noise. A zero weight marks an observation the sample cannot explain.
inline double condition_sample(ParameterSample& s, const Observation& obs, double rho) {
  double w = 1.0;
  const double root = std::sqrt(1.0 - rho * rho);
  if (const auto& x = obs[DataKind::Shm]) {
    w *= dist::pdf(s.sigma_L_marginal(), *x);
    s.sigma_L = *x;
  }
  const auto& scf = obs[DataKind::Inspection];
  const auto& sy = obs[DataKind::Testing];
  if (!scf && !sy) return w;

  const auto scf_m = s.scf_marginal();
  const auto sy_m = s.sigma_Y_marginal();
  if (scf && sy) {
    const auto z1 = dist::latent_score(scf_m, *scf);
    const auto z2 = dist::latent_score(sy_m, *sy);
    if (!z1 || !z2) return 0.0;
    w *= dist::pdf(scf_m, *scf) * dist::pdf(sy_m, *sy) * dist::gaussian_copula_density(*z1, *z2, rho);
    s.scf = *scf;
    s.sigma_Y = *sy;
    s.z_scf = *z1;
    s.z_sigma_Y = *z2;
  } else if (scf) {
    const auto z1 = dist::latent_score(scf_m, *scf);
    if (!z1) return 0.0;
    w *= dist::pdf(scf_m, *scf);
    const double noise = (s.z_sigma_Y - rho * s.z_scf) / root;
    s.z_scf = *z1;
    s.z_sigma_Y = dist::conditional_latent(*z1, rho, noise);
    s.scf = *scf;
    s.sigma_Y = dist::quantile_from_latent(sy_m, s.z_sigma_Y);
  } else {
    const auto z2 = dist::latent_score(sy_m, *sy);
    if (!z2) return 0.0;
    w *= dist::pdf(sy_m, *sy);
    const double noise = (s.z_scf - rho * s.z_sigma_Y) / root;
    s.z_sigma_Y = *z2;
    s.z_scf = dist::conditional_latent(*z2, rho, noise);
    s.sigma_Y = *sy;
    s.scf = dist::quantile_from_latent(scf_m, s.z_scf);
  }
  return std::isfinite(w) ? w : 0.0;
}

}  // namespace detail

/// Preposterior sample set given exactly observed quantities.
///
/// Observing everything collapses the set to the known (sigma_L, SCF, sigma_Y);
/// only the fatigue scatter stays uncertain.
template <class ObservationFor>
void condition_perfect_into(std::span<const ParameterSample> prior, ObservationFor&& observation_for,
                            double rho, ConditionedSet& out) {
  out.samples.assign(prior.begin(), prior.end());
  out.weights.resize(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i) {
    out.weights[i] = detail::condition_sample(out.samples[i], observation_for(i), rho);
  }
  out.ess = effective_sample_size(out.weights);
}

inline ConditionedSet condition_perfect(std::span<const ParameterSample> prior, const Observation& observed,
                                        double rho) {
  if (prior.empty()) throw InvalidParameter("condition_perfect: no samples");
  ConditionedSet out;
  condition_perfect_into(prior, [&](std::size_t) -> const Observation& { return observed; }, rho, out);
  if (!(out.ess > 0.0)) {
    throw DegenerateConditioning("observation lies outside the support of every prior sample");
  }
  return out;
}

struct WeightedSet {
  std::vector<double> weights;  // normalised to sum 1
  double ess = 0.0;
};

namespace detail {

// Beyond this many squared standard deviations / 2 the Gaussian density underflows.
inline constexpr double kUnderflowExponent = 700.0;

/// Multiplies `weights` by the Gaussian likelihood of z given each sample's value.
/// Returns false when z is incompatible with every sample.
inline bool apply_likelihood(std::span<const ParameterSample> samples, DataKind kind, double eps, double z,
                             std::span<double> weights) {
  double q_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    const double r = (z - observed_quantity(samples[i], kind)) / eps;
    q_min = std::min(q_min, 0.5 * r * r);
  }
  if (!(q_min <= kUnderflowExponent)) return false;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    const double r = (z - observed_quantity(samples[i], kind)) / eps;
    weights[i] *= std::exp(q_min - 0.5 * r * r);
  }
  return true;
}

}  // namespace detail

/// Importance weights of prior samples given an imprecise measurement z ~ N(value, eps).
inline WeightedSet condition_imperfect(std::span<const ParameterSample> prior, const DataSource& src, double z) {
  src.validate();
  if (src.is_perfect()) throw InvalidParameter("condition_imperfect needs a Gaussian data source");
  if (prior.empty()) throw InvalidParameter("condition_imperfect: no samples");
  WeightedSet out;
  out.weights.assign(prior.size(), 1.0);
  if (!detail::apply_likelihood(prior, src.kind, *src.epsilon, z, out.weights)) {
    throw DegeneratePosterior("measurement " + std::to_string(z) + " is outside the prior support", z);
  }
  double total = 0.0;
  for (double w : out.weights) total += w;
  for (double& w : out.weights) w /= total;
  out.ess = effective_sample_size(out.weights);
  return out;
}

struct VoiOptions {
  std::size_t n_outer = 2000;
  std::uint64_t seed = 42;
  double ess_floor = 50.0;
  double max_degenerate_fraction = 0.01;
  std::size_t workers = 1;

  void validate() const {
    if (n_outer < 1) throw InvalidParameter("n_outer must be >= 1");
    if (!(ess_floor >= 1.0)) throw InvalidParameter("ess_floor must be >= 1");
  }
};

/// One hypothesised measurement and the inner decision it leads to.
struct OuterDrawRecord {
  std::array<double, 3> z{};  // measured value per data kind; NaN when not measured
  double inner_e_u = 0.0;     // optimal preposterior expected utility
  double gain = 0.0;          // inner optimum minus inner utility of the prior-optimal choice
  std::size_t choice = 0;     // index of the inner-optimal action (or policy)
  double ess = 0.0;
  bool fallback = false;
  bool degenerate = false;
};

struct VoiResult {
  std::string plan;
  double e_u_prior = 0.0;
  double e_u_preposterior = 0.0;
  double voi = 0.0;
  double mc_standard_error = 0.0;
  std::size_t n_outer = 0;
  std::size_t n_fallback = 0;
  std::size_t n_degenerate = 0;
  double min_ess = 0.0;
  std::size_t prior_choice = 0;
  std::vector<OuterDrawRecord> draws;
};

/// Random inputs shared by every plan of one analysis (common random numbers).
struct OuterDraws {
  std::vector<ParameterSample> samples;
  dist::LhsMatrix measurement_noise;  // n_outer x 3, one column per data kind
  dist::LhsMatrix fallback_noise;     // n_inner x 3

  static OuterDraws make(const DecisionProblem& p, const VoiOptions& o) {
    return {draw_parameter_samples(o.n_outer, o.seed, p.priors, streams::kOuterSamples),
            dist::lhs_sample(o.n_outer, 3, o.seed, streams::kMeasurementNoise),
            dist::lhs_sample(p.samples.size(), 3, o.seed, streams::kFallbackNoise)};
  }
};

/// Result of solving one inner (preposterior) decision.
struct InnerOutcome {
  double best_utility = 0.0;
  double prior_choice_utility = 0.0;
  std::size_t choice = 0;
};

/// Preposterior loop shared by the static and multi-window analyses.
///
/// For every outer draw: hypothesise the plan's measurements, condition the
/// inner set (pinning and reweighting for perfect sources, likelihood weights
/// for imperfect ones), then call inner_solve(samples, weights). An imperfect
/// update whose ESS falls below the floor is replaced by a likelihood-proposal
/// sample: each inner sample observes z + eps * xi_i and is then conditioned as
/// if that value were exact.
template <class InnerSolve>
VoiResult preposterior(const MeasurementPlan& plan, const DecisionProblem& problem, const OuterDraws& outer,
                       const VoiOptions& options, double e_u_prior, std::size_t prior_choice,
                       InnerSolve&& inner_solve) {
  plan.validate();
  options.validate();
  const std::size_t n_outer = outer.samples.size();
  const double rho = problem.priors.rho;
  std::span<const ParameterSample> inner(problem.samples);

  VoiResult result;
  result.plan = plan.label();
  result.e_u_prior = e_u_prior;
  result.n_outer = n_outer;
  result.prior_choice = prior_choice;
  result.draws.resize(n_outer);

  parallel_for(n_outer, options.workers, [&](std::size_t k) {
    OuterDrawRecord& rec = result.draws[k];
    rec.z.fill(std::numeric_limits<double>::quiet_NaN());
    if (plan.sources.empty()) {
      rec.inner_e_u = e_u_prior;
      rec.choice = prior_choice;
      rec.ess = static_cast<double>(inner.size());
      return;
    }
    Observation exact;
    for (const auto& src : plan.sources) {
      const auto kind = static_cast<std::size_t>(src.kind);
      rec.z[kind] = hypothesize_measurement(outer.samples[k], src, outer.measurement_noise(k, kind));
      if (src.is_perfect()) exact[src.kind] = rec.z[kind];
    }

    ConditionedSet set;
    if (exact.empty()) {
      set.samples.assign(inner.begin(), inner.end());
      set.weights.assign(inner.size(), 1.0);
    } else {
      condition_perfect_into(inner, [&](std::size_t) -> const Observation& { return exact; }, rho, set);
    }
    bool usable = true;
    bool imperfect = false;
    for (const auto& src : plan.sources) {
      if (src.is_perfect()) continue;
      imperfect = true;
      usable = usable && detail::apply_likelihood(set.samples, src.kind, *src.epsilon,
                                                  rec.z[static_cast<std::size_t>(src.kind)], set.weights);
    }
    set.ess = effective_sample_size(set.weights);
    if (imperfect && (!usable || set.ess < options.ess_floor)) {
      rec.fallback = true;
      condition_perfect_into(
          inner,
          [&](std::size_t i) {
            Observation o = exact;
            for (const auto& src : plan.sources) {
              if (src.is_perfect()) continue;
              const auto kind = static_cast<std::size_t>(src.kind);
              const double xi = dist::normal_quantile(outer.fallback_noise(i, kind));
              o[src.kind] = rec.z[kind] + *src.epsilon * xi;
            }
            return o;
          },
          rho, set);
    }
    rec.ess = set.ess;
    if (!(set.ess > 0.0)) {
      rec.degenerate = true;
      rec.inner_e_u = e_u_prior;
      rec.choice = prior_choice;
      return;
    }
    const InnerOutcome out = inner_solve(std::span<const ParameterSample>(set.samples),
                                         std::span<const double>(set.weights));
    rec.inner_e_u = out.best_utility;
    rec.gain = out.best_utility - out.prior_choice_utility;
    rec.choice = out.choice;
  });

  double sum = 0.0;
  result.min_ess = std::numeric_limits<double>::infinity();
  for (const auto& r : result.draws) {
    sum += r.gain;
    result.n_fallback += r.fallback ? 1 : 0;
    result.n_degenerate += r.degenerate ? 1 : 0;
    result.min_ess = std::min(result.min_ess, r.ess);
  }
  const double n = static_cast<double>(n_outer);
  result.voi = sum / n;
  double ss = 0.0;
  for (const auto& r : result.draws) ss += (r.gain - result.voi) * (r.gain - result.voi);
  result.mc_standard_error = n_outer > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  result.e_u_preposterior = result.e_u_prior + result.voi;

  if (static_cast<double>(result.n_degenerate) > options.max_degenerate_fraction * n) {
    throw AnalysisError("plan " + result.plan + ": " + std::to_string(result.n_degenerate) + " of " +
                        std::to_string(n_outer) + " outer draws had a degenerate posterior");
  }
  return result;
}

namespace detail {

inline auto static_inner_solver(const DecisionProblem& p, std::size_t prior_choice) {
  const LoadingConfig load = single_window(p.load);
  return [&p, load, prior_choice](std::span<const ParameterSample> samples, std::span<const double> weights) {
    std::vector<std::uint8_t> masks(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      masks[i] = weights[i] > 0.0 ? failure_mask(samples[i], p.sn, load) : 0;
    }
    const DecisionResult r = decide(failure_table(masks, weights), p.cost);
    return InnerOutcome{r.e_u_star, r.table[prior_choice].expected_utility, r.a_star.index()};
  };
}

}  // namespace detail

/// Expected value of the measurement plan for the single-window decision.
///
/// VoI is the outer mean of E[u | z] under the inner optimum minus E[u | z]
/// under the prior optimum; by the tower property this has the same
/// expectation as the difference of expected utilities and each term is >= 0.
inline VoiResult voi(const MeasurementPlan& plan, const DecisionProblem& problem, const OuterDraws& outer,
                     const VoiOptions& options) {
  problem.validate();
  const DecisionResult prior = solve(problem);
  const std::size_t choice = prior.a_star.index();
  return preposterior(plan, problem, outer, options, prior.e_u_star, choice,
                      detail::static_inner_solver(problem, choice));
}

inline VoiResult voi(const MeasurementPlan& plan, const DecisionProblem& problem, const VoiOptions& options) {
  return voi(plan, problem, OuterDraws::make(problem, options), options);
}

/// Perfect-information VoI of every subset of {testing, inspection, SHM}, indexed
/// by kind bitmask (bit 0 testing, bit 1 inspection, bit 2 SHM), on common outer draws.
inline std::array<VoiResult, 8> voi_all_subsets(const DecisionProblem& problem, const VoiOptions& options) {
  const auto outer = OuterDraws::make(problem, options);
  std::array<VoiResult, 8> out;
  for (unsigned mask = 0; mask < 8; ++mask) {
    out[mask] = voi(MeasurementPlan::perfect_subset(mask), problem, outer, options);
  }
  return out;
}

struct SensitivityPoint {
  double epsilon = 0.0;
  VoiResult result;
};

/// VoI of one imperfect source over an ascending grid of measurement errors.
inline std::vector<SensitivityPoint> voi_sensitivity(DataKind kind, std::span<const double> epsilons,
                                                     const DecisionProblem& problem, const VoiOptions& options) {
  if (epsilons.empty()) throw InvalidParameter("sensitivity grid is empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw InvalidParameter("sensitivity epsilons must be > 0");
    if (i > 0 && !(epsilons[i] > epsilons[i - 1])) throw InvalidParameter("sensitivity epsilons must ascend");
  }
  const auto outer = OuterDraws::make(problem, options);
  std::vector<SensitivityPoint> out;
  out.reserve(epsilons.size());
  for (double eps : epsilons) {
    MeasurementPlan plan{{DataSource::gaussian(kind, eps)}};
    out.push_back({eps, voi(plan, problem, outer, options)});
  }
  return out;
}

/// Standard error of the mean of paired per-draw differences sum_j sign_j * gain_j.
inline double paired_standard_error(std::span<const VoiResult* const> results, std::span<const double> signs) {
  if (results.empty() || results.size() != signs.size()) throw InvalidParameter("paired_standard_error: bad input");
  const std::size_t n = results.front()->draws.size();
  std::vector<double> d(n, 0.0);
  for (std::size_t j = 0; j < results.size(); ++j) {
    if (results[j]->draws.size() != n) throw InvalidParameter("paired_standard_error: draw counts differ");
    for (std::size_t k = 0; k < n; ++k) d[k] += signs[j] * results[j]->draws[k].gain;
  }
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  return n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
}

}  // namespace voi

#endif  // VOI_VOI_ENGINE_HPP
