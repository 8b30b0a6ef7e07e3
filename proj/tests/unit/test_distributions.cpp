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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "voi/distributions.hpp"
#include "voi/random.hpp"

namespace {

using namespace voi;
using namespace voi::dist;

// Regularised lower incomplete gamma by its power series, inverted by bisection.
double gamma_p_series(double a, double x) {
  if (x <= 0.0) return 0.0;
  double term = 1.0 / a, sum = term;
  for (int n = 1; n < 500; ++n) {
    term *= x / (a + n);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * sum;
}

double gamma_quantile_oracle(double shape, double scale, double p) {
  double lo = 0.0, hi = 100.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (gamma_p_series(shape, mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) * scale;
}

std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
  return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

CopulaSpec prior_mean_copula(double rho) {
  return CopulaSpec::with_rho(MarginalSpec::gamma(2.0, 0.5), MarginalSpec::lognormal(400.0, 10.0), rho);
}

TEST(LognormalFromMoments, MatchesClosedForm) {
  const auto a = lognormal_from_moments(10.0, 3.0);
  EXPECT_NEAR(a.sigma_log, 0.29356, 1e-5);
  EXPECT_NEAR(a.mu_log, 2.25950, 1e-5);
  const auto b = lognormal_from_moments(6.0, 3.0);
  EXPECT_NEAR(b.sigma_log, 0.47238, 1e-5);
  EXPECT_NEAR(b.mu_log, 1.68022, 5e-5);
  const auto c = lognormal_from_moments(1.0, 1e-6);
  EXPECT_NEAR(c.sigma_log, 1e-6, 1e-12);
  EXPECT_NEAR(c.mu_log, 0.0, 1e-12);
}

TEST(LognormalFromMoments, RejectsNonPositiveInputs) {
  EXPECT_THROW(lognormal_from_moments(0.0, 1.0), InvalidParameter);
  EXPECT_THROW(lognormal_from_moments(1.0, 0.0), InvalidParameter);
  EXPECT_THROW(lognormal_from_moments(-1.0, 1.0), InvalidParameter);
}

TEST(LognormalFromMoments, AnalyticRoundTrip) {
  for (double m : {0.01, 1.0, 6.0, 10.0, 400.0}) {
    for (double sd : {1e-3, 3.0, 20.0}) {
      const auto p = lognormal_from_moments(m, sd);
      const double s2 = p.sigma_log * p.sigma_log;
      const double mean = std::exp(p.mu_log + 0.5 * s2);
      EXPECT_NEAR(mean / m, 1.0, 1e-12);
      EXPECT_NEAR(mean * std::sqrt(std::expm1(s2)) / sd, 1.0, 1e-12);
    }
  }
}

// Sampled moments. The coefficient-of-variation > 1 cases are dominated by the
// extreme upper strata and are checked at full size by the acceptance suite.
TEST(LognormalFromMoments, SampledMomentRoundTrip) {
  for (double m : {6.0, 10.0, 400.0}) {
    for (double sd : {3.0, 20.0}) {
      if (sd > m) continue;
      const auto spec = MarginalSpec::lognormal(m, sd);
      const auto u = lhs_sample(1000000, 1, 11);
      double s1 = 0.0, s2 = 0.0;
      for (double x : u.values) {
        const double v = quantile(spec, x);
        s1 += v;
        s2 += v * v;
      }
      const double n = static_cast<double>(u.n);
      const double mean = s1 / n;
      const double sample_sd = std::sqrt((s2 - n * mean * mean) / (n - 1.0));
      EXPECT_NEAR(mean / m, 1.0, 0.01) << "m=" << m << " sd=" << sd;
      EXPECT_NEAR(sample_sd / sd, 1.0, 0.01) << "m=" << m << " sd=" << sd;
    }
  }
}

TEST(Quantile, NormalMedian) { EXPECT_DOUBLE_EQ(quantile(MarginalSpec::normal(50.0, 5.0), 0.5), 50.0); }

TEST(Quantile, GammaAgainstSeriesOracle) {
  EXPECT_NEAR(quantile(MarginalSpec::gamma(2.0, 0.5), 0.5), 0.8392, 1e-4);
  for (double shape : {0.3, 1.0, 2.0, 7.5}) {
    for (double p : {0.01, 0.2, 0.5, 0.9, 0.999}) {
      const double expected = gamma_quantile_oracle(shape, 0.5, p);
      EXPECT_NEAR(quantile(MarginalSpec::gamma(shape, 0.5), p), expected, 1e-9 * std::max(1.0, expected))
          << "shape=" << shape << " p=" << p;
    }
  }
}

TEST(Quantile, TruncatedNormalIsNonNegative) {
  const auto spec = MarginalSpec::truncated_normal(0.5, 0.5);
  for (int i = 1; i < 1000; ++i) EXPECT_GE(quantile(spec, i / 1000.0), 0.0);
  const auto far = MarginalSpec::truncated_normal(-3.0, 0.5);
  for (double u : {1e-9, 0.5, 1.0 - 1e-9}) EXPECT_GE(quantile(far, u), 0.0);
}

TEST(Quantile, InvertsCdf) {
  const MarginalSpec specs[] = {MarginalSpec::normal(50, 5), MarginalSpec::lognormal(10, 3),
                                MarginalSpec::gamma(2, 0.5), MarginalSpec::truncated_normal(0.5, 0.5)};
  for (const auto& s : specs) {
    for (double u : {0.001, 0.1, 0.5, 0.9, 0.999}) EXPECT_NEAR(cdf(s, quantile(s, u)), u, 1e-10);
  }
}

TEST(Quantile, RejectsUniformsOutsideOpenInterval) {
  EXPECT_THROW(quantile(MarginalSpec::normal(0, 1), 0.0), DomainError);
  EXPECT_THROW(quantile(MarginalSpec::normal(0, 1), 1.0), DomainError);
}

TEST(LhsSample, OnePointPerQuarter) {
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    auto m = lhs_sample(4, 1, seed);
    std::sort(m.values.begin(), m.values.end());
    for (std::size_t k = 0; k < 4; ++k) {
      EXPECT_GE(m.values[k], k * 0.25);
      EXPECT_LT(m.values[k], (k + 1) * 0.25);
    }
  }
}

TEST(LhsSample, StratificationIsExact) {
  for (std::size_t n : {1, 2, 7, 100, 1000, 4096}) {
    for (std::size_t d : {1, 3, 10}) {
      const auto m = lhs_sample(n, d, n * 31 + d);
      for (std::size_t j = 0; j < d; ++j) {
        std::vector<int> hits(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
          const double u = m(i, j);
          ASSERT_GT(u, 0.0);
          ASSERT_LT(u, 1.0);
          ++hits[static_cast<std::size_t>(u * static_cast<double>(n))];
        }
        for (int h : hits) ASSERT_EQ(h, 1) << "n=" << n << " d=" << d;
      }
    }
  }
}

TEST(LhsSample, ColumnMeansNearHalf) {
  const auto m = lhs_sample(1000, 3, 7);
  for (std::size_t j = 0; j < 3; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < 1000; ++i) s += m(i, j);
    EXPECT_NEAR(s / 1000.0, 0.5, 0.01);
  }
}

TEST(LhsSample, Deterministic) {
  EXPECT_EQ(lhs_sample(2, 2, 0), lhs_sample(2, 2, 0));
  EXPECT_EQ(lhs_sample(500, 10, 42, 3), lhs_sample(500, 10, 42, 3));
  EXPECT_NE(lhs_sample(500, 10, 42, 3), lhs_sample(500, 10, 42, 4));
}

TEST(Copula, IdentityCopulaGivesIndependentQuantiles) {
  const auto spec = prior_mean_copula(0.0);
  for (double u1 : {0.05, 0.5, 0.93}) {
    for (double u2 : {0.2, 0.7}) {
      const auto d = copula_sample(spec, u1, u2);
      EXPECT_NEAR(d.x1, quantile(spec.marginals[0], u1), 1e-12);
      EXPECT_NEAR(d.x2, quantile(spec.marginals[1], u2), 1e-9);
    }
  }
}

TEST(Copula, SpearmanMatchesArcsineIdentity) {
  const double rho = 2.0 / 3.0;
  const auto spec = prior_mean_copula(rho);
  const auto u = lhs_sample(100000, 2, 5);
  std::vector<double> a(u.n), b(u.n);
  for (std::size_t i = 0; i < u.n; ++i) {
    const auto d = copula_sample(spec, u(i, 0), u(i, 1));
    a[i] = d.x1;
    b[i] = d.x2;
  }
  const double expected = 6.0 / std::numbers::pi * std::asin(rho / 2.0);
  EXPECT_NEAR(expected, 0.6490, 1e-4);
  EXPECT_NEAR(pearson(ranks(a), ranks(b)), expected, 0.02);
}

TEST(Copula, MeanScfAtPriorMeanHyperparameters) {
  const auto spec = prior_mean_copula(2.0 / 3.0);
  const auto u = lhs_sample(100000, 2, 9);
  double s = 0.0;
  for (std::size_t i = 0; i < u.n; ++i) s += copula_sample(spec, u(i, 0), u(i, 1)).x1;
  EXPECT_NEAR(s / static_cast<double>(u.n), 1.0, 0.02);
}

TEST(Copula, MarginalFidelityKolmogorovSmirnov) {
  const auto spec = prior_mean_copula(2.0 / 3.0);
  const std::size_t n = 100000;
  const auto u = lhs_sample(n, 2, 21);
  Rng rng(77);
  std::vector<double> c1(n), c2(n), d1(n), d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = copula_sample(spec, u(i, 0), u(i, 1));
    c1[i] = d.x1;
    c2[i] = d.x2;
    d1[i] = quantile(spec.marginals[0], rng.uniform_open());
    d2[i] = quantile(spec.marginals[1], rng.uniform_open());
  }
  // Two-sample KS critical value at the 1% level.
  const double critical = 1.628 * std::sqrt(2.0 / static_cast<double>(n));
  EXPECT_LT(ks_two_sample(c1, d1), critical);
  EXPECT_LT(ks_two_sample(c2, d2), critical);
}

TEST(Copula, RejectsNonPositiveDefiniteCorrelation) {
  EXPECT_THROW(copula_sample(prior_mean_copula(1.0), 0.3, 0.4), DecompositionError);
  EXPECT_THROW(copula_sample(prior_mean_copula(-1.5), 0.3, 0.4), DecompositionError);
}

TEST(ConditionalCopula, IndependentWhenRhoZero) {
  const auto spec = prior_mean_copula(0.0);
  for (double u : {0.1, 0.5, 0.8}) {
    EXPECT_NEAR(conditional_copula_sample(spec, 0, 1.7, u), quantile(spec.marginals[1], u), 1e-9);
  }
}

TEST(ConditionalCopula, ComonotoneLimitMapsMedianToMedian) {
  const auto spec = prior_mean_copula(1.0 - 1e-9);
  const double med1 = quantile(spec.marginals[0], 0.5);
  const double med2 = quantile(spec.marginals[1], 0.5);
  for (double u : {0.01, 0.5, 0.99}) EXPECT_NEAR(conditional_copula_sample(spec, 0, med1, u) / med2, 1.0, 1e-5);
}

TEST(ConditionalCopula, LatentMeanAgreesWithJointRejectionSampling) {
  const double rho = 2.0 / 3.0;
  const auto spec = prior_mean_copula(rho);
  const double x90 = quantile(spec.marginals[0], 0.9);

  // Conditional sampler: average latent score of the output.
  const auto u = lhs_sample(20000, 1, 3);
  double s = 0.0;
  for (double v : u.values) {
    const double y = conditional_copula_sample(spec, 0, x90, v);
    s += *latent_score(spec.marginals[1], y);
  }
  const double conditional_mean = s / static_cast<double>(u.n);
  EXPECT_NEAR(conditional_mean, 0.8545, 0.01);

  // Joint draws accepted when the first coordinate is within a narrow band of its 90th percentile.
  const auto j = lhs_sample(400000, 2, 4);
  double acc = 0.0;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < j.n; ++i) {
    const auto d = copula_sample(spec, j(i, 0), j(i, 1));
    if (std::abs(cdf(spec.marginals[0], d.x1) - 0.9) < 0.005) {
      acc += d.z2;
      ++kept;
    }
  }
  ASSERT_GT(kept, 1000u);
  const double se = std::sqrt(1.0 - rho * rho) / std::sqrt(static_cast<double>(kept));
  EXPECT_NEAR(acc / static_cast<double>(kept), conditional_mean, 4.0 * se + 0.01);
}

TEST(ConditionalCopula, BoundaryObservationIsDegenerate) {
  const auto spec = prior_mean_copula(0.5);
  EXPECT_THROW(conditional_copula_sample(spec, 0, 0.0, 0.5), DegenerateConditioning);
  EXPECT_THROW(conditional_copula_sample(spec, 1, -5.0, 0.5), DegenerateConditioning);
}

TEST(LatentScore, RoundTripsThroughQuantile) {
  const auto g = MarginalSpec::gamma(2.0, 0.5);
  for (double z : {-6.0, -1.0, 0.0, 2.5, 7.0}) {
    const auto back = latent_score(g, quantile_from_latent(g, z));
    ASSERT_TRUE(back.has_value());
    EXPECT_NEAR(*back, z, 1e-6);
  }
}

}  // namespace
