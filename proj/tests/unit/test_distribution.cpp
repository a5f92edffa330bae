#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "manyq/distribution.hpp"

using namespace manyq;

namespace {

// Composite Simpson rule, the independent oracle for integrated survival.
template <class F>
double simpson(F f, double a, double b, int n = 4000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST(Distribution, ExponentialMean) {
  const auto d = Distribution::exponential(1.0);
  EXPECT_DOUBLE_EQ(d.mean(), 1.0);
  EXPECT_TRUE(std::isinf(d.support_end()));
  EXPECT_NEAR(d.hazard(3.7), 1.0, 1e-12);
}

TEST(Distribution, ErlangTwoTwoHasUnitMean) {
  const auto d = Distribution::erlang(2, 2.0);
  EXPECT_NEAR(d.mean(), 1.0, 1e-15);
  // g(x) = 4 x e^{-2x}
  for (double x : {0.0, 0.3, 1.0, 2.5}) EXPECT_NEAR(d.density(x), 4.0 * x * std::exp(-2.0 * x), 1e-14);
  EXPECT_NEAR(d.integrated_survival(50.0), 1.0, 1e-12);
}

TEST(Distribution, RejectsBadParameters) {
  EXPECT_THROW(Distribution::exponential(0.0), std::invalid_argument);
  EXPECT_THROW(Distribution::exponential(-1.0), std::invalid_argument);
  EXPECT_THROW(Distribution::erlang(0, 1.0), std::invalid_argument);
  EXPECT_THROW(Distribution::uniform(1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(Distribution::piecewise_linear({{0.0, 0.0}, {1.0, 0.6}, {2.0, 0.4}, {3.0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(Distribution::piecewise_linear({{0.0, 0.2}, {1.0, 1.0}}), std::invalid_argument);
}

TEST(Distribution, FlatPiecewiseLaw) {
  const auto d = Distribution::piecewise_linear({{0.0, 0.0}, {1.0, 0.5}, {2.0, 0.5}, {3.0, 1.0}});
  EXPECT_NEAR(d.mean(), 1.5, 1e-14);
  EXPECT_DOUBLE_EQ(d.support_end(), 3.0);
  EXPECT_DOUBLE_EQ(d.density(1.5), 0.0);
  // generalized inverse takes the left end of the flat piece
  EXPECT_NEAR(d.quantile(0.5), 1.0, 1e-12);
}

TEST(DistributionProperty, CdfSurvivalDensityConsistency) {
  gen::Gen g(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Distribution d = g.law();
    const double top = std::isfinite(d.support_end()) ? d.support_end() : 6.0 * d.mean();
    for (int k = 1; k < 20; ++k) {
      const double x = top * k / 20.0;
      EXPECT_NEAR(d.cdf(x) + d.survival(x), 1.0, 1e-12) << d.describe();
      const double h = 1e-5;
      if (x > 2 * h) {
        const double numeric = (d.cdf(x + h) - d.cdf(x - h)) / (2 * h);
        // skip kinks of piecewise and shifted laws
        if (std::abs(d.density(x + h) - d.density(x - h)) < 1e-3) {
          EXPECT_NEAR(numeric, d.density(x), 1e-5 * (1.0 + d.density(x))) << d.describe() << " x=" << x;
        }
      }
    }
  }
}

TEST(DistributionProperty, IntegratedSurvivalMatchesQuadrature) {
  gen::Gen g(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Distribution d = g.law();
    const double top = std::isfinite(d.support_end()) ? d.support_end() : 5.0 * d.mean();
    for (double frac : {0.1, 0.5, 1.0}) {
      const double x = frac * top;
      EXPECT_NEAR(d.integrated_survival(x), simpson([&](double y) { return d.survival(y); }, 0.0, x), 1e-6)
          << d.describe();
    }
    EXPECT_NEAR(d.integrated_survival(d.support_end() < 1e300 ? d.support_end() : 200.0 * d.mean()), d.mean(),
                1e-7 * d.mean());
  }
}

TEST(DistributionProperty, QuantileGaloisAndInverses) {
  gen::Gen g(13);
  for (int trial = 0; trial < 200; ++trial) {
    const Distribution d = g.law();
    for (int k = 1; k < 10; ++k) {
      const double p = k / 10.0;
      const double q = d.quantile(p);
      EXPECT_GE(d.cdf(q), p - 1e-10) << d.describe();
      EXPECT_LT(d.cdf(std::max(0.0, q - 1e-6)), p + 1e-10) << d.describe();
      const double y = p * d.mean();
      EXPECT_NEAR(d.integrated_survival(d.integrated_survival_inverse(y)), y, 1e-9) << d.describe();
    }
  }
}

TEST(DistributionProperty, SampleMeanMatches) {
  gen::Gen g(14);
  for (int trial = 0; trial < 20; ++trial) {
    const Distribution d = g.law();
    RandomStream rng(g.u64());
    const int n = 40000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = d.sample(rng);
      ASSERT_GE(x, 0.0);
      s += x;
      s2 += x * x;
    }
    const double m = s / n;
    const double sd = std::sqrt((s2 / n - m * m) / n);
    EXPECT_NEAR(m, d.mean(), 5.0 * sd) << d.describe();
  }
}

TEST(Distribution, ResidualOfExponentialIsMemoryless) {
  const auto d = Distribution::exponential(2.0);
  RandomStream rng(3);
  double s = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) s += d.sample_residual(5.0, rng);
  EXPECT_NEAR(s / n, 0.5, 5.0 * 0.5 / std::sqrt(n));
}

TEST(Distribution, ResidualMatchesConditionalLaw) {
  // P(X - a > y | X > a) = S(a + y) / S(a) for Erlang(3, 1), a = 2, y = 1.
  const auto d = Distribution::erlang(3, 1.0);
  RandomStream rng(4);
  const int n = 50000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += d.sample_residual(2.0, rng) > 1.0;
  const double p = d.survival(3.0) / d.survival(2.0);
  EXPECT_NEAR(static_cast<double>(hits) / n, p, 5.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Distribution, ScaledLaw) {
  const auto d = Distribution::erlang(2, 2.0).scaled(0.5);
  EXPECT_NEAR(d.mean(), 0.5, 1e-15);
  EXPECT_NEAR(d.cdf(0.4), Distribution::erlang(2, 2.0).cdf(0.8), 1e-15);
}

TEST(Distribution, EquilibriumOfExponentialIsExponential) {
  const auto e = equilibrium_interarrival(Distribution::exponential(3.0));
  for (double x : {0.1, 0.5, 2.0}) EXPECT_NEAR(e.cdf(x), 1.0 - std::exp(-3.0 * x), 1e-12);
}

TEST(Distribution, ShiftedSupportAndHazard) {
  const auto d = Distribution::shifted(3.0, Distribution::exponential(1.0));
  EXPECT_DOUBLE_EQ(d.cdf(2.9), 0.0);
  EXPECT_DOUBLE_EQ(d.hazard(1.0), 0.0);
  EXPECT_NEAR(d.hazard(4.0), 1.0, 1e-12);
  EXPECT_NEAR(d.mean(), 4.0, 1e-12);
}
