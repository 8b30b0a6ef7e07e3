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

#ifndef VOI_STRUCTURAL_MODEL_HPP
#define VOI_STRUCTURAL_MODEL_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "voi/distributions.hpp"
#include "voi/errors.hpp"
#include "voi/random.hpp"

namespace voi {

/// Hierarchical prior over applied stress, stress concentration and yield strength.
///
/// sigma_L ~ Normal(mu_sigma_L, sd_sigma_L); (SCF, sigma_Y) are coupled by a
/// Gaussian copula with Gamma(alpha_scf, gamma_scf) and LogNormal(mu_sigma_Y,
/// sd_sigma_Y) marginals. Every slot below is a hyperprior.
struct PriorConfig {
  dist::MarginalSpec mu_sigma_L = dist::MarginalSpec::normal(50.0, 5.0);
  dist::MarginalSpec sd_sigma_L = dist::MarginalSpec::lognormal(6.0, 3.0);
  dist::MarginalSpec alpha_scf = dist::MarginalSpec::truncated_normal(2.0, 0.5);
  dist::MarginalSpec gamma_scf = dist::MarginalSpec::truncated_normal(0.5, 0.5);
  dist::MarginalSpec mu_sigma_Y = dist::MarginalSpec::normal(400.0, 20.0);
  dist::MarginalSpec sd_sigma_Y = dist::MarginalSpec::lognormal(10.0, 3.0);
  double rho = 2.0 / 3.0;  // latent correlation of (SCF, sigma_Y)

  void validate() const {
    for (const auto* m : {&mu_sigma_L, &sd_sigma_L, &alpha_scf, &gamma_scf, &mu_sigma_Y, &sd_sigma_Y}) {
      m->validate();
    }
    if (!(rho > -1.0 && rho < 1.0)) throw InvalidParameter("correlation out of range");
  }

  bool operator==(const PriorConfig&) const = default;
};

/// One joint draw from the hierarchical prior.
///
/// Besides the physical quantities it carries the latent copula scores and the
/// fatigue-scatter uniform, so every failure indicator is a deterministic
/// function of the sample and conditioning can reuse the same random inputs.
struct ParameterSample {
  double mu_sigma_L = 0.0;  // MPa
  double sd_sigma_L = 1.0;  // MPa
  double alpha_scf = 1.0;
  double gamma_scf = 1.0;
  double mu_sigma_Y = 1.0;  // MPa
  double sd_sigma_Y = 1.0;  // MPa
  double sigma_L = 0.0;     // MPa
  double scf = 0.0;
  double sigma_Y = 1.0;     // MPa
  double z_scf = 0.0;       // latent copula score of scf
  double z_sigma_Y = 0.0;   // latent copula score of sigma_Y
  double u_scatter = 0.5;   // SN scatter level

  dist::MarginalSpec sigma_L_marginal() const {
    return dist::MarginalSpec::normal(mu_sigma_L, sd_sigma_L);
  }
  dist::MarginalSpec scf_marginal() const {
    constexpr double kTiny = 1e-12;
    return dist::MarginalSpec::gamma(std::max(alpha_scf, kTiny), std::max(gamma_scf, kTiny));
  }
  dist::MarginalSpec sigma_Y_marginal() const {
    return dist::MarginalSpec::lognormal(mu_sigma_Y, sd_sigma_Y);
  }
  dist::CopulaSpec copula(double rho) const {
    return dist::CopulaSpec::with_rho(scf_marginal(), sigma_Y_marginal(), rho);
  }

  bool operator==(const ParameterSample&) const = default;
};

/// Log-linear SN curve: log10 N = log10_a - slope_m log10 S + scatter_sd * Phi^-1(u).
/// Defaults are the class D mean curve and its scatter.
struct SnModel {
  double log10_a = 12.6007;
  double slope_m = 3.0;
  double scatter_sd = 0.2095;

  void validate() const {
    if (!(slope_m > 0.0)) throw InvalidParameter("sn.slope_m must be > 0");
    if (!(scatter_sd >= 0.0)) throw InvalidParameter("sn.scatter_sd must be >= 0");
    if (!std::isfinite(log10_a)) throw InvalidParameter("sn.log10_a must be finite");
  }
  bool operator==(const SnModel&) const = default;
};

/// Stress cycles per maintenance window, tuned so that the no-action failure
/// probability of the default prior is 0.0357 (see calibrate_annual_cycles).
inline constexpr double kCalibratedAnnualCycles = 157836.0;

struct LoadingConfig {
  double annual_cycles = kCalibratedAnnualCycles;
  std::size_t windows = 1;

  void validate() const {
    if (!(annual_cycles >= 1.0)) throw InvalidParameter("load.annual_cycles must be >= 1");
    if (windows < 1) throw InvalidParameter("load.windows must be >= 1");
  }
  bool operator==(const LoadingConfig&) const = default;
};

/// Risk-mitigation actions taken in one window; all eight combinations are valid.
struct ActionSet {
  bool repair = false;
  bool replace = false;
  bool reduce_operation = false;

  static constexpr std::size_t kCount = 8;

  /// Bit 0 repair, bit 1 replace, bit 2 reduce operation.
  constexpr std::size_t index() const {
    return (repair ? 1U : 0U) | (replace ? 2U : 0U) | (reduce_operation ? 4U : 0U);
  }
  static constexpr ActionSet from_index(std::size_t i) {
    return {(i & 1U) != 0, (i & 2U) != 0, (i & 4U) != 0};
  }
  constexpr bool any() const { return repair || replace || reduce_operation; }

  std::string label() const {
    if (!any()) return "no action";
    std::string out;
    auto add = [&](const char* s) {
      if (!out.empty()) out += " + ";
      out += s;
    };
    if (repair) add("repair");
    if (replace) add("replace");
    if (reduce_operation) add("reduce operation");
    return out;
  }

  bool operator==(const ActionSet&) const = default;
};

/// Intervention multipliers.
namespace effects {
inline constexpr double kRepairStress = 0.75;
inline constexpr double kReplaceScf = 0.0;
inline constexpr double kReduceCycles = 0.5;
}  // namespace effects

/// Fixed LHS column layout of draw_parameter_samples.
namespace columns {
inline constexpr std::size_t kMuSigmaL = 0;
inline constexpr std::size_t kSdSigmaL = 1;
inline constexpr std::size_t kAlphaScf = 2;
inline constexpr std::size_t kGammaScf = 3;
inline constexpr std::size_t kMuSigmaY = 4;
inline constexpr std::size_t kSdSigmaY = 5;
inline constexpr std::size_t kSigmaL = 6;
inline constexpr std::size_t kCopulaFirst = 7;
inline constexpr std::size_t kCopulaSecond = 8;
inline constexpr std::size_t kScatter = 9;
inline constexpr std::size_t kCount = 10;
}  // namespace columns

/// Builds one sample from a row of ten uniforms.
inline ParameterSample sample_from_uniforms(std::span<const double> u, const PriorConfig& priors) {
  using dist::quantile;
  ParameterSample s;
  s.mu_sigma_L = quantile(priors.mu_sigma_L, u[columns::kMuSigmaL]);
  s.sd_sigma_L = quantile(priors.sd_sigma_L, u[columns::kSdSigmaL]);
  s.alpha_scf = quantile(priors.alpha_scf, u[columns::kAlphaScf]);
  s.gamma_scf = quantile(priors.gamma_scf, u[columns::kGammaScf]);
  s.mu_sigma_Y = quantile(priors.mu_sigma_Y, u[columns::kMuSigmaY]);
  s.sd_sigma_Y = quantile(priors.sd_sigma_Y, u[columns::kSdSigmaY]);
  s.sigma_L = quantile(s.sigma_L_marginal(), u[columns::kSigmaL]);
  const auto draw = dist::copula_sample(s.copula(priors.rho), u[columns::kCopulaFirst],
                                        u[columns::kCopulaSecond]);
  s.scf = draw.x1;
  s.sigma_Y = draw.x2;
  s.z_scf = draw.z1;
  s.z_sigma_Y = draw.z2;
  s.u_scatter = u[columns::kScatter];
  return s;
}

/// Latin hypercube draws from the full hierarchical prior.
inline std::vector<ParameterSample> draw_parameter_samples(std::size_t n, std::uint64_t seed,
                                                           const PriorConfig& priors = {},
                                                           std::uint64_t stream = streams::kInnerSamples) {
  priors.validate();
  const auto design = dist::lhs_sample(n, columns::kCount, seed, stream);
  std::vector<ParameterSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_from_uniforms(design.row(i), priors));
  return out;
}

/// Returns a copy with repair and replacement applied. Reduced operation acts on
/// the cycle count, not on the sample.
inline ParameterSample apply_actions(ParameterSample s, ActionSet a) {
  if (a.repair) s.sigma_L *= effects::kRepairStress;
  if (a.replace) s.scf *= effects::kReplaceScf;
  return s;
}

inline double cycle_factor(ActionSet a) { return a.reduce_operation ? effects::kReduceCycles : 1.0; }

/// Stress at the concentration: nominal stress amplified by (1 + SCF).
inline double peak_stress(double sigma_L, double scf) { return sigma_L * (1.0 + scf); }

// Compressive nominal stress never over-stresses and gives no fatigue range.
inline double effective_peak_stress(const ParameterSample& s) {
  return s.sigma_L > 0.0 ? peak_stress(s.sigma_L, s.scf) : 0.0;
}

inline bool overstress_failed(const ParameterSample& s, ActionSet a) {
  return effective_peak_stress(apply_actions(s, a)) > s.sigma_Y;
}

/// log10 of the permissible cycle count at stress range S (S > 0).
inline double log10_permissible_cycles(double stress_range, const SnModel& sn, double u_scatter) {
  return sn.log10_a - sn.slope_m * std::log10(stress_range) +
         sn.scatter_sd * dist::normal_quantile(u_scatter);
}

/// Miner damage n / N for `cycles` applied at `stress_range`.
inline double fatigue_damage(double stress_range, double cycles, const SnModel& sn, double u_scatter) {
  if (!(stress_range > 0.0) || !(cycles > 0.0)) return 0.0;
  return std::pow(10.0, std::log10(cycles) - log10_permissible_cycles(stress_range, sn, u_scatter));
}

/// Fatigue failure after load.windows windows at the post-action stress range.
inline bool fatigue_failed(const ParameterSample& s, ActionSet a, const SnModel& sn,
                           const LoadingConfig& load, double u_scatter) {
  const double cycles = load.annual_cycles * cycle_factor(a) * static_cast<double>(load.windows);
  return fatigue_damage(effective_peak_stress(apply_actions(s, a)), cycles, sn, u_scatter) >= 1.0;
}

inline bool failed(const ParameterSample& s, ActionSet a, const SnModel& sn, const LoadingConfig& load) {
  return overstress_failed(s, a) || fatigue_failed(s, a, sn, load, s.u_scatter);
}

/// Failure indicators of all eight action sets; bit a.index() is set when a fails.
///
/// Shares the peak stresses and SN evaluations between actions, and agrees
/// exactly with failed().
inline std::uint8_t failure_mask(const ParameterSample& s, const SnModel& sn, const LoadingConfig& load) {
  std::uint8_t mask = 0;
  const double windows = static_cast<double>(load.windows);
  const double cycles[2] = {load.annual_cycles * windows,
                            load.annual_cycles * effects::kReduceCycles * windows};
  for (std::size_t geometry = 0; geometry < 4; ++geometry) {  // repair / replace bits
    const ActionSet base = ActionSet::from_index(geometry);
    const double stress = effective_peak_stress(apply_actions(s, base));
    const bool over = stress > s.sigma_Y;
    for (std::size_t reduce = 0; reduce < 2; ++reduce) {
      const bool fail = over || fatigue_damage(stress, cycles[reduce], sn, s.u_scatter) >= 1.0;
      if (fail) mask |= static_cast<std::uint8_t>(1U << (geometry | (reduce << 2)));
    }
  }
  return mask;
}

struct FailureEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
  double effective_n = 0.0;
};

/// Weighted failure frequency from per-sample indicators. Empty weights mean equal weights.
inline FailureEstimate failure_frequency(std::span<const std::uint8_t> indicators,
                                         std::span<const double> weights = {}) {
  if (indicators.empty()) throw InvalidParameter("pr_fail: no samples");
  double hit = 0.0, total = 0.0, sq = 0.0;
  if (weights.empty()) {
    for (auto f : indicators) hit += f ? 1.0 : 0.0;
    total = static_cast<double>(indicators.size());
    sq = total;
  } else {
    for (std::size_t i = 0; i < indicators.size(); ++i) {
      total += weights[i];
      sq += weights[i] * weights[i];
      if (indicators[i]) hit += weights[i];
    }
  }
  if (!(total > 0.0)) throw InvalidParameter("pr_fail: weights sum to zero");
  const double p = hit / total;
  const double ess = total * total / sq;
  return {p, std::sqrt(p * (1.0 - p) / ess), ess};
}

/// Probability of over-stress or fatigue under action set a.
inline FailureEstimate pr_fail(std::span<const ParameterSample> samples, ActionSet a, const SnModel& sn,
                               const LoadingConfig& load, std::span<const double> weights = {}) {
  if (samples.empty()) throw InvalidParameter("pr_fail: no samples");
  if (!weights.empty() && weights.size() != samples.size()) {
    throw InvalidParameter("pr_fail: weight count does not match sample count");
  }
  std::vector<std::uint8_t> ind(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) ind[i] = failed(samples[i], a, sn, load) ? 1 : 0;
  return failure_frequency(ind, weights);
}

/// Reliability index -Phi^-1(p); p = 0 gives +inf and p = 1 gives -inf.
inline double pr_to_beta(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("pr_to_beta: probability must lie in [0, 1]");
  if (p == 0.0) return std::numeric_limits<double>::infinity();
  if (p == 1.0) return -std::numeric_limits<double>::infinity();
  return -dist::normal_quantile(p);
}

/// Smallest cycle count (to ~1e-9 relative) at which the no-action failure
/// frequency of `samples` reaches `target`.
inline double calibrate_annual_cycles(std::span<const ParameterSample> samples, const SnModel& sn,
                                      double target) {
  if (!(target > 0.0 && target < 1.0)) throw InvalidParameter("calibration target must lie in (0, 1)");
  auto p_at = [&](double log10_cycles) {
    const LoadingConfig load{std::pow(10.0, log10_cycles), 1};
    return pr_fail(samples, ActionSet{}, sn, load).probability;
  };
  double lo = 0.0, hi = 12.0;
  if (p_at(hi) < target) throw InvalidParameter("calibration target unreachable by fatigue alone");
  if (p_at(lo) >= target) return 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (p_at(mid) >= target ? hi : lo) = mid;
  }
  return std::pow(10.0, hi);
}

}  // namespace voi

#endif  // VOI_STRUCTURAL_MODEL_HPP
