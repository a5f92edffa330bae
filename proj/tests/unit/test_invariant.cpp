#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "manyq/invariant.hpp"

using namespace manyq;

TEST(Invariant, ExponentialPatienceClosedForm) {
  for (const auto& [lambda, gamma] : {std::pair{2.0, 1.0}, {1.5, 0.5}, {1.0, 1.0}}) {
    const Interval b = compute_B_lambda(Distribution::exponential(gamma), lambda, 1e-10);
    const double x = 1.0 + (lambda - 1.0) / gamma;
    EXPECT_NEAR(b.lo, x, 1e-8);
    EXPECT_NEAR(b.hi, x, 1e-8);
  }
}

TEST(InvariantProperty, ExponentialClosedFormOnRandomParameters) {
  gen::Gen g(41);
  for (int trial = 0; trial < 200; ++trial) {
    const double lambda = g.uniform(1.0, 5.0);
    const double gamma = g.uniform(0.2, 4.0);
    const Interval b = compute_B_lambda(Distribution::exponential(gamma), lambda, 1e-10);
    EXPECT_NEAR(b.lo, 1.0 + (lambda - 1.0) / gamma, 1e-8);
    EXPECT_LE(b.width(), 1e-8);
  }
}

TEST(InvariantProperty, ObjectiveMeetsTargetOnInterval) {
  gen::Gen g(42);
  for (int trial = 0; trial < 100; ++trial) {
    const Distribution r = g.law();
    const double lambda = g.uniform(1.05, 4.0);
    const Interval b = compute_B_lambda(r, lambda, 1e-10);
    const double target = (lambda - 1.0) / lambda;
    EXPECT_NEAR(b_lambda_objective(r, lambda, 0.5 * (b.lo + b.hi)), target, 1e-6) << r.describe();
    if (b.lo > 1.0 + 1e-6) {
      EXPECT_LT(b_lambda_objective(r, lambda, b.lo - 1e-6), target + 1e-12) << r.describe();
    }
  }
}

TEST(Invariant, FlatPatienceGivesInterval) {
  const auto r = Distribution::piecewise_linear({{0.0, 0.0}, {1.0, 0.5}, {2.0, 0.5}, {3.0, 1.0}});
  const Interval b = compute_B_lambda(r, 2.0, 1e-10);
  EXPECT_NEAR(b.lo, 2.5, 1e-6);
  EXPECT_NEAR(b.hi, 3.5, 1e-6);
  const InvariantSet inv = invariant_manifold(2.0, Distribution::exponential(1.0), r);
  EXPECT_FALSE(is_unique(inv));
}

TEST(Invariant, SubcriticalSingleton) {
  const InvariantSet inv = invariant_manifold(0.6, Distribution::erlang(2, 2.0), Distribution::exponential(1.0));
  EXPECT_EQ(inv.regime, Regime::subcritical);
  EXPECT_DOUBLE_EQ(inv.b_l, 0.6);
  EXPECT_DOUBLE_EQ(inv.b_r, 0.6);
  EXPECT_DOUBLE_EQ(inv.nu_mass, 0.6);
  EXPECT_TRUE(is_unique(inv));
  // without abandonment too
  EXPECT_NO_THROW(invariant_manifold(0.6, Distribution::exponential(1.0), std::nullopt));
}

TEST(Invariant, NoAbandonmentSupercriticalIsUndefined) {
  EXPECT_THROW(invariant_manifold(2.0, Distribution::exponential(1.0), std::nullopt), std::invalid_argument);
}

TEST(Invariant, RequiresUnitMeanService) {
  EXPECT_THROW(invariant_manifold(0.5, Distribution::exponential(2.0), std::nullopt), std::invalid_argument);
}

TEST(Invariant, FixedPointsAreStationaryUnderTheFluidDynamics) {
  const double delta = 1e-3;
  const auto e1 = Distribution::exponential(1.0);
  for (double lambda : {0.5, 2.0}) {
    const InvariantSet inv = invariant_manifold(lambda, e1, e1);
    const FixedPointReport r = verify_fixed_point(invariant_state(inv, inv.b_l), 20.0, delta);
    EXPECT_LE(r.max(), 10 * delta) << "lambda " << lambda;
  }
  // every point of a flat-patience interval
  const auto flat = Distribution::piecewise_linear({{0.0, 0.0}, {1.0, 0.5}, {2.0, 0.5}, {3.0, 1.0}});
  const InvariantSet inv = invariant_manifold(2.0, e1, flat);
  for (double x : {inv.b_l, 3.0, inv.b_r}) {
    EXPECT_LE(verify_fixed_point(invariant_state(inv, x), 10.0, delta).max(), 10 * delta) << x;
  }
  EXPECT_THROW(invariant_state(inv, 4.0), std::invalid_argument);
}
