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

#ifndef VOI_DISTRIBUTIONS_HPP
#define VOI_DISTRIBUTIONS_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "voi/errors.hpp"
#include "voi/random.hpp"

namespace voi::dist {

namespace detail {

using boost::math::policies::ignore_error;
using boost::math::policies::overflow_error;
using boost::math::policies::policy;
using boost::math::policies::promote_double;
using MathPolicy = policy<overflow_error<ignore_error>, promote_double<false>>;

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

}  // namespace detail

/// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * detail::kInvSqrt2); }

/// Standard normal quantile. p must lie in (0, 1); p = 0 or 1 gives -inf / +inf.
inline double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p, detail::MathPolicy{});
}

inline double normal_pdf(double z) { return detail::kInvSqrt2Pi * std::exp(-0.5 * z * z); }

enum class Family { Normal, LogNormal, Gamma, TruncatedNormalNonNeg };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::Normal: return "Normal";
    case Family::LogNormal: return "LogNormal";
    case Family::Gamma: return "Gamma";
    case Family::TruncatedNormalNonNeg: return "TruncatedNormalNonNeg";
  }
  return "?";
}

struct LogNormalParams {
  double mu_log;
  double sigma_log;
};

/// Converts a natural-scale mean and standard deviation into log-scale parameters.
inline LogNormalParams lognormal_from_moments(double m, double sd) {
  if (!(m > 0.0) || !(sd > 0.0) || !std::isfinite(m) || !std::isfinite(sd)) {
    throw InvalidParameter("lognormal_from_moments: mean and sd must be positive and finite");
  }
  const double ratio = sd / m;
  const double sigma_log = std::sqrt(std::log1p(ratio * ratio));
  return {std::log(m) - 0.5 * sigma_log * sigma_log, sigma_log};
}

/// A univariate marginal law. The two parameters are family specific:
///   Normal                 mean, sd
///   LogNormal              natural-scale mean, natural-scale sd
///   Gamma                  shape, scale
///   TruncatedNormalNonNeg  pre-truncation mean and sd, support [0, inf)
struct MarginalSpec {
  Family family = Family::Normal;
  double a = 0.0;
  double b = 1.0;

  static MarginalSpec normal(double mean, double sd) { return {Family::Normal, mean, sd}; }
  static MarginalSpec lognormal(double mean, double sd) { return {Family::LogNormal, mean, sd}; }
  static MarginalSpec gamma(double shape, double scale) { return {Family::Gamma, shape, scale}; }
  static MarginalSpec truncated_normal(double mean, double sd) {
    return {Family::TruncatedNormalNonNeg, mean, sd};
  }

  void validate() const {
    if (!std::isfinite(a) || !std::isfinite(b)) {
      throw InvalidParameter(std::string(to_string(family)) + ": parameters must be finite");
    }
    switch (family) {
      case Family::Normal:
      case Family::TruncatedNormalNonNeg:
        if (!(b > 0.0)) throw InvalidParameter(std::string(to_string(family)) + ": sd must be > 0");
        break;
      case Family::LogNormal:
        if (!(a > 0.0) || !(b > 0.0)) {
          throw InvalidParameter("LogNormal: mean and sd must be > 0");
        }
        break;
      case Family::Gamma:
        if (!(a > 0.0) || !(b > 0.0)) throw InvalidParameter("Gamma: shape and scale must be > 0");
        break;
    }
  }

  bool operator==(const MarginalSpec&) const = default;
};

namespace detail {

// Mass below zero of the untruncated normal and its complement, computed from
// whichever side is accurate.
inline std::pair<double, double> truncation_masses(const MarginalSpec& s) {
  const double t = s.a / s.b;
  return {normal_cdf(-t), normal_cdf(t)};
}

}  // namespace detail

/// Lower-tail probability F(x).
inline double cdf(const MarginalSpec& s, double x) {
  switch (s.family) {
    case Family::Normal:
      return normal_cdf((x - s.a) / s.b);
    case Family::LogNormal: {
      if (x <= 0.0) return 0.0;
      const auto p = lognormal_from_moments(s.a, s.b);
      return normal_cdf((std::log(x) - p.mu_log) / p.sigma_log);
    }
    case Family::Gamma:
      if (x <= 0.0) return 0.0;
      return boost::math::gamma_p(s.a, x / s.b, detail::MathPolicy{});
    case Family::TruncatedNormalNonNeg: {
      if (x <= 0.0) return 0.0;
      const auto [below, above] = detail::truncation_masses(s);
      return (normal_cdf((x - s.a) / s.b) - below) / above;
    }
  }
  return 0.0;
}

/// Upper-tail probability 1 - F(x), accurate where F(x) rounds to 1.
inline double ccdf(const MarginalSpec& s, double x) {
  switch (s.family) {
    case Family::Normal:
      return normal_cdf(-(x - s.a) / s.b);
    case Family::LogNormal: {
      if (x <= 0.0) return 1.0;
      const auto p = lognormal_from_moments(s.a, s.b);
      return normal_cdf(-(std::log(x) - p.mu_log) / p.sigma_log);
    }
    case Family::Gamma:
      if (x <= 0.0) return 1.0;
      return boost::math::gamma_q(s.a, x / s.b, detail::MathPolicy{});
    case Family::TruncatedNormalNonNeg: {
      if (x <= 0.0) return 1.0;
      const auto [below, above] = detail::truncation_masses(s);
      return normal_cdf(-(x - s.a) / s.b) / above;
    }
  }
  return 1.0;
}

inline double pdf(const MarginalSpec& s, double x) {
  switch (s.family) {
    case Family::Normal:
      return normal_pdf((x - s.a) / s.b) / s.b;
    case Family::LogNormal: {
      if (x <= 0.0) return 0.0;
      const auto p = lognormal_from_moments(s.a, s.b);
      return normal_pdf((std::log(x) - p.mu_log) / p.sigma_log) / (x * p.sigma_log);
    }
    case Family::Gamma:
      if (x < 0.0) return 0.0;
      return boost::math::gamma_p_derivative(s.a, x / s.b, detail::MathPolicy{}) / s.b;
    case Family::TruncatedNormalNonNeg: {
      if (x < 0.0) return 0.0;
      const auto [below, above] = detail::truncation_masses(s);
      return normal_pdf((x - s.a) / s.b) / (s.b * above);
    }
  }
  return 0.0;
}

/// Maps a latent standard-normal score to the marginal: F^-1(Phi(z)).
///
/// Works from whichever tail is accurate, so scores far beyond +-8 still map
/// to distinct values where the family allows it.
inline double quantile_from_latent(const MarginalSpec& s, double z) {
  switch (s.family) {
    case Family::Normal:
      return s.a + s.b * z;
    case Family::LogNormal: {
      const auto p = lognormal_from_moments(s.a, s.b);
      return std::exp(p.mu_log + p.sigma_log * z);
    }
    case Family::Gamma:
      if (z <= 0.0) return s.b * boost::math::gamma_p_inv(s.a, normal_cdf(z), detail::MathPolicy{});
      return s.b * boost::math::gamma_q_inv(s.a, normal_cdf(-z), detail::MathPolicy{});
    case Family::TruncatedNormalNonNeg: {
      const auto [below, above] = detail::truncation_masses(s);
      double x;
      if (s.a >= 0.0) {
        x = s.a + s.b * normal_quantile(below + normal_cdf(z) * above);
      } else {
        x = s.a - s.b * normal_quantile(normal_cdf(-z) * above);
      }
      return std::max(0.0, x);
    }
  }
  return 0.0;
}

/// Inverse CDF. u must lie in the open interval (0, 1).
inline double quantile(const MarginalSpec& s, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: level must lie in (0, 1)");
  switch (s.family) {
    case Family::Gamma:
      return s.b * boost::math::gamma_p_inv(s.a, u, detail::MathPolicy{});
    case Family::TruncatedNormalNonNeg: {
      const auto [below, above] = detail::truncation_masses(s);
      return std::max(0.0, s.a + s.b * normal_quantile(below + u * above));
    }
    default:
      return quantile_from_latent(s, normal_quantile(u));
  }
}

/// Latent normal score Phi^-1(F(x)), or nullopt when F(x) is 0 or 1 in double precision.
inline std::optional<double> latent_score(const MarginalSpec& s, double x) {
  switch (s.family) {
    case Family::Normal:
      return (x - s.a) / s.b;
    case Family::LogNormal: {
      if (!(x > 0.0) || !std::isfinite(x)) return std::nullopt;
      const auto p = lognormal_from_moments(s.a, s.b);
      return (std::log(x) - p.mu_log) / p.sigma_log;
    }
    default: {
      const double lower = cdf(s, x);
      if (lower < 0.5) {
        if (!(lower > 0.0)) return std::nullopt;
        return normal_quantile(lower);
      }
      const double upper = ccdf(s, x);
      if (!(upper > 0.0)) return std::nullopt;
      return -normal_quantile(upper);
    }
  }
}

/// Latin hypercube design: n rows, d columns, row-major uniforms in (0, 1).
struct LhsMatrix {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> values;

  double operator()(std::size_t row, std::size_t col) const { return values[row * d + col]; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * d, d}; }
  bool operator==(const LhsMatrix&) const = default;
};

/// Each column holds exactly one point in every stratum [k/n, (k+1)/n).
inline LhsMatrix lhs_sample(std::size_t n, std::size_t d, std::uint64_t seed,
                            std::uint64_t stream = 0) {
  if (n == 0 || d == 0) throw InvalidParameter("lhs_sample: n and d must be >= 1");
  LhsMatrix m{n, d, std::vector<double>(n * d)};
  Rng rng(seed, stream);
  std::vector<std::size_t> strata(n);
  const double width = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) strata[i] = i;
    rng.shuffle(strata);
    for (std::size_t i = 0; i < n; ++i) {
      double u = (static_cast<double>(strata[i]) + rng.uniform_open()) * width;
      // Rounding may land exactly on the upper stratum edge; keep it inside.
      const double upper = static_cast<double>(strata[i] + 1) * width;
      if (u >= upper) u = std::nextafter(upper, 0.0);
      m.values[i * d + j] = u;
    }
  }
  return m;
}

/// Bivariate Gaussian copula with arbitrary marginals and latent correlation rho.
struct CopulaSpec {
  std::array<MarginalSpec, 2> marginals;
  std::array<std::array<double, 2>, 2> corr{{{1.0, 0.0}, {0.0, 1.0}}};

  static CopulaSpec with_rho(MarginalSpec first, MarginalSpec second, double rho) {
    return {{first, second}, {{{1.0, rho}, {rho, 1.0}}}};
  }

  double rho() const { return corr[0][1]; }

  void validate() const {
    for (const auto& m : marginals) m.validate();
    if (corr[0][0] != 1.0 || corr[1][1] != 1.0 || corr[0][1] != corr[1][0]) {
      throw InvalidParameter("copula correlation must be symmetric with unit diagonal");
    }
  }
};

/// Lower Cholesky factor of a 2x2 correlation matrix.
inline std::array<std::array<double, 2>, 2> cholesky(const std::array<std::array<double, 2>, 2>& c) {
  const double l00_sq = c[0][0];
  if (!(l00_sq > 0.0)) throw DecompositionError("correlation matrix is not positive definite");
  const double l00 = std::sqrt(l00_sq);
  const double l10 = c[1][0] / l00;
  const double l11_sq = c[1][1] - l10 * l10;
  if (!(l11_sq > 0.0)) throw DecompositionError("correlation matrix is not positive definite");
  return {{{l00, 0.0}, {l10, std::sqrt(l11_sq)}}};
}

struct CopulaDraw {
  double x1;  // first marginal
  double x2;  // second marginal
  double z1;  // latent scores
  double z2;
};

/// Maps two independent uniforms to one joint draw.
inline CopulaDraw copula_sample(const CopulaSpec& spec, double u1, double u2) {
  const auto l = cholesky(spec.corr);
  const double e1 = normal_quantile(u1);
  const double e2 = normal_quantile(u2);
  if (!std::isfinite(e1) || !std::isfinite(e2)) {
    throw DomainError("copula_sample: uniforms must lie in (0, 1)");
  }
  const double z1 = l[0][0] * e1;
  const double z2 = l[1][0] * e1 + l[1][1] * e2;
  return {quantile_from_latent(spec.marginals[0], z1), quantile_from_latent(spec.marginals[1], z2),
          z1, z2};
}

/// Latent score of the unobserved coordinate given the observed one.
inline double conditional_latent(double z_observed, double rho, double noise) {
  return rho * z_observed + std::sqrt(1.0 - rho * rho) * noise;
}

/// Draws the other coordinate given that marginal `observed_index` equals `observed_value`.
inline double conditional_copula_sample(const CopulaSpec& spec, std::size_t observed_index,
                                        double observed_value, double u) {
  if (observed_index > 1) throw InvalidParameter("observed_index must be 0 or 1");
  cholesky(spec.corr);
  const auto z_obs = latent_score(spec.marginals[observed_index], observed_value);
  if (!z_obs) {
    throw DegenerateConditioning("observed value sits at a support boundary of its marginal");
  }
  const double noise = normal_quantile(u);
  if (!std::isfinite(noise)) throw DomainError("conditional_copula_sample: u must lie in (0, 1)");
  return quantile_from_latent(spec.marginals[1 - observed_index],
                              conditional_latent(*z_obs, spec.rho(), noise));
}

/// Gaussian copula density c(Phi(z1), Phi(z2)) expressed on latent scores.
inline double gaussian_copula_density(double z1, double z2, double rho) {
  const double one_minus = 1.0 - rho * rho;
  const double q = (rho * rho * (z1 * z1 + z2 * z2) - 2.0 * rho * z1 * z2) / (2.0 * one_minus);
  return std::exp(-q) / std::sqrt(one_minus);
}

}  // namespace voi::dist

#endif  // VOI_DISTRIBUTIONS_HPP
