#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "generators.hpp"
#include "manyq/density_measure.hpp"
#include "manyq/point_measure.hpp"

using namespace manyq;

namespace {

std::size_t brute_count_at_most(const std::vector<double>& ages, double x) {
  return static_cast<std::size_t>(std::count_if(ages.begin(), ages.end(), [x](double a) { return a <= x; }));
}

}  // namespace

TEST(PointMeasure, BasicQueries) {
  PointMeasure m({0.5, 0.1, 0.5, 2.0});
  EXPECT_EQ(m.mass(), 4u);
  EXPECT_EQ(m.count_at_most(0.5), 3u);
  EXPECT_EQ(m.tail_mass(0.5), 3u);
  EXPECT_DOUBLE_EQ(m.quantile(0), 0.0);
  EXPECT_DOUBLE_EQ(m.quantile(1), 0.1);
  EXPECT_DOUBLE_EQ(m.quantile(2), 0.5);
  EXPECT_DOUBLE_EQ(m.quantile(3), 0.5);
  EXPECT_DOUBLE_EQ(m.quantile(4), 2.0);
  EXPECT_THROW(m.quantile(5), std::domain_error);
}

TEST(PointMeasure, ShiftAndRemove) {
  PointMeasure m({0.0, 1.0});
  m.shift(0.25);
  EXPECT_EQ(m.ages(), (std::vector<double>{0.25, 1.25}));
  m.add_atom(0.0);
  m.remove_atom(1.25);
  EXPECT_EQ(m.ages(), (std::vector<double>{0.0, 0.25}));
  EXPECT_THROW(m.remove_atom(7.0), std::invalid_argument);
  const PointMeasure later = m.shifted(1.0);
  EXPECT_EQ(later.ages(), (std::vector<double>{1.0, 1.25}));
  EXPECT_EQ(m.ages(), (std::vector<double>{0.0, 0.25}));
}

TEST(PointMeasureProperty, GaloisConnection) {
  gen::Gen g(21);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto n = static_cast<std::size_t>(g.integer(1, 30));
    const std::vector<double> ages = g.ages(n, 5.0, g.coin());
    const PointMeasure m(ages);
    std::vector<double> xs = ages;
    for (int k = 0; k < 5; ++k) xs.push_back(g.uniform(0.0, 6.0));
    for (std::size_t q = 1; q <= n; ++q) {
      const double qx = m.quantile(static_cast<double>(q));
      for (double x : xs) {
        ASSERT_EQ(qx <= x, q <= brute_count_at_most(ages, x));
      }
    }
  }
}

TEST(PointMeasureProperty, CountsMatchBruteForce) {
  gen::Gen g(22);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = static_cast<std::size_t>(g.integer(0, 25));
    std::vector<double> ages = g.ages(n, 3.0, g.coin());
    PointMeasure m(ages);
    const double dt = g.uniform(0.0, 1.0);
    m.shift(dt);
    for (double& a : ages) a += dt;
    std::sort(ages.begin(), ages.end());
    EXPECT_EQ(m.ages(), ages);
    for (int k = 0; k < 5; ++k) {
      const double x = g.uniform(0.0, 5.0);
      EXPECT_EQ(m.count_at_most(x), brute_count_at_most(ages, x));
      const auto tail = static_cast<std::size_t>(std::count_if(ages.begin(), ages.end(), [x](double a) { return a >= x; }));
      EXPECT_EQ(m.tail_mass(x), tail);
    }
    for (std::size_t k = 1; k <= n; ++k) EXPECT_EQ(m.order_statistic(k), ages[k - 1]);
  }
}

TEST(PointMeasure, Histogram) {
  const PointMeasure m({0.1, 0.2, 0.9, 1.5, 3.0});
  const Histogram h = histogram(m, uniform_edges(0.0, 2.0, 4));
  EXPECT_EQ(h.counts, (std::vector<double>{2.0, 1.0, 0.0, 1.0}));
}

TEST(DensityMeasure, EquilibriumMass) {
  const auto d = Distribution::erlang(2, 2.0);
  const DensityMeasure m = equilibrium_measure(d, 2.0);
  EXPECT_NEAR(m.total_mass(), 2.0, 1e-12);
  EXPECT_NEAR(m.density(0.7), 2.0 * d.survival(0.7), 1e-14);
  EXPECT_NEAR(m.cumulative(1.3), 2.0 * d.integrated_survival(1.3), 1e-12);
  EXPECT_THROW(m.quantile(2.5), std::domain_error);
}

TEST(DensityMeasureProperty, QuantileInvertsCumulative) {
  gen::Gen g(23);
  for (int trial = 0; trial < 200; ++trial) {
    const Distribution d = g.law();
    const double c = g.uniform(0.1, 3.0);
    const DensityMeasure m = equilibrium_measure(d, c);
    for (int k = 1; k < 10; ++k) {
      const double q = m.total_mass() * k / 10.0;
      EXPECT_NEAR(m.cumulative(m.quantile(q)), q, 1e-8) << d.describe();
    }
  }
}

TEST(DensityMeasure, GridTrapezoid) {
  // density 1 + x on [0, 2]: mass 4, cumulative x + x^2/2 exact for trapezoids of a linear function
  std::vector<double> g(201);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 1.0 + 0.01 * static_cast<double>(i);
  const DensityMeasure m = DensityMeasure::from_grid(g, 0.01);
  EXPECT_NEAR(m.total_mass(), 4.0, 1e-12);
  EXPECT_NEAR(m.cumulative(1.0), 1.5, 1e-12);
  EXPECT_NEAR(m.quantile(1.5), 1.0, 1e-9);
  EXPECT_THROW(DensityMeasure::from_grid({1.0, -1.0}, 0.1), std::invalid_argument);
}
