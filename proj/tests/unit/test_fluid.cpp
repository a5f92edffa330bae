#include <gtest/gtest.h>

#include <cmath>

#include "manyq/fluid.hpp"

using namespace manyq;

namespace {

FluidInput erlang_example() {
  FluidInput in;
  in.lambda = 1.0;
  in.x0 = 1.0;
  in.service = Distribution::erlang(2, 2.0);
  in.nu0 = InitialMeasure::dirac(0.0, 1.0);
  return in;
}

double q_error(const FluidTrajectory& tr) {
  double e = 0.0;
  for (std::size_t n = 0; n < tr.nodes(); ++n) e = std::max(e, std::abs(tr.Q[n] - 0.25 * (1.0 - std::exp(-4.0 * tr.t[n]))));
  return e;
}

}  // namespace

TEST(Fluid, ErlangExample) {
  const FluidTrajectory tr = solve_fluid(erlang_example(), 10.0, 1e-3);
  ASSERT_EQ(tr.nodes(), 10001u);
  EXPECT_NEAR(tr.Q.back(), 0.25, 1e-6);
  EXPECT_NEAR(tr.X.back(), 1.25, 1e-6);
  for (std::size_t n = 0; n < tr.nodes(); n += 250) {
    EXPECT_NEAR(tr.hs_nu[n], 1.0 - std::exp(-4.0 * tr.t[n]), 1e-5);
    EXPECT_NEAR(tr.B[n], 1.0, 1e-12);  // the servers never idle
  }
  const FluidDefects d = fluid_defects(tr);
  EXPECT_LE(d.non_idling, 1e-12);
  EXPECT_LE(d.conservation, 1e-10);
  EXPECT_LE(d.queue_identity, 1e-10);
  EXPECT_LE(d.departure_balance, 1e-5);
}

TEST(Fluid, SecondOrderRefinement) {
  const double e1 = q_error(solve_fluid(erlang_example(), 10.0, 4e-3));
  const double e2 = q_error(solve_fluid(erlang_example(), 10.0, 2e-3));
  const double e3 = q_error(solve_fluid(erlang_example(), 10.0, 1e-3));
  EXPECT_GE(std::log2(e1 / e2), 1.8);
  EXPECT_GE(std::log2(e2 / e3), 1.8);
}

TEST(Fluid, ExponentialServiceClosedForm) {
  // M/M fluid without abandonment from x0 = 0.5 below capacity: x' = lambda - x.
  FluidInput in;
  in.lambda = 0.8;
  in.x0 = 0.5;
  in.nu0 = InitialMeasure::dirac(0.0, 0.5);
  const FluidTrajectory tr = solve_fluid(in, 5.0, 1e-3);
  for (std::size_t n = 0; n < tr.nodes(); n += 500) {
    EXPECT_NEAR(tr.X[n], 0.8 - 0.3 * std::exp(-tr.t[n]), 1e-5);
  }
}

TEST(Fluid, ExponentialAbandonmentClosedForm) {
  // exp(1) service and patience: X behaves like an infinite-server queue, x' = lambda - x.
  FluidInput in;
  in.lambda = 2.0;
  in.x0 = 1.0;
  in.service = Distribution::exponential(1.0);
  in.patience = Distribution::exponential(1.0);
  in.nu0 = InitialMeasure::dirac(0.0, 1.0);
  in.eta0 = InitialMeasure::dirac(0.0, 1.0);
  const FluidTrajectory tr = solve_fluid(in, 5.0, 1e-3);
  for (std::size_t n = 0; n < tr.nodes(); n += 500) {
    const double t = tr.t[n];
    EXPECT_NEAR(tr.X[n], 2.0 - std::exp(-t), 1e-4);
    EXPECT_NEAR(tr.eta_mass[n], 2.0 - std::exp(-t), 1e-6);
  }
}

TEST(Fluid, EtaEvolveMass) {
  const Distribution r = Distribution::exponential(0.5);
  const EtaProfile p = eta_evolve(InitialMeasure::dirac(1.0, 2.0), 3.0, r, 2.0);
  // new part 3 (1 - e^{-t/2}) / 0.5, initial part 2 e^{-t/2}
  EXPECT_NEAR(p.total_mass(), 6.0 * (1.0 - std::exp(-1.0)) + 2.0 * std::exp(-1.0), 1e-10);
  // constant hazard: reneging rate of a queue q is 0.5 q
  EXPECT_NEAR(p.reneging_rate(1.3), 0.65, 1e-8);
}

TEST(Fluid, RenewalDensityOracles) {
  const auto ue = renewal_density(Distribution::exponential(1.0), 1e-3, 5000);
  for (double v : ue) EXPECT_NEAR(v, 1.0, 1e-6);
  const auto u = renewal_density(Distribution::erlang(2, 2.0), 1e-3, 10000);
  for (std::size_t i = 0; i < u.size(); i += 100) EXPECT_NEAR(u[i], 1.0 - std::exp(-4e-3 * i), 1e-4);
}

TEST(Fluid, KeyRenewalAgreesWithScheme) {
  const FluidTrajectory tr = solve_fluid(erlang_example(), 10.0, 1e-3);
  const auto k = solve_K_renewal(tr);
  ASSERT_EQ(k.size(), tr.nodes());
  for (std::size_t n = 0; n < tr.nodes(); ++n) ASSERT_NEAR(k[n], tr.K[n], 5e-3);
}

TEST(Fluid, RejectsInadmissibleInput) {
  FluidInput in = erlang_example();
  in.x0 = 0.5;  // in-service mass 1 exceeds x0
  EXPECT_THROW(validate_fluid_input(in), std::invalid_argument);
  in = erlang_example();
  in.nu0 = InitialMeasure::dirac(0.0, 0.5);  // idles while x0 = 1 would fill the servers
  EXPECT_THROW(validate_fluid_input(in), std::invalid_argument);
  in = erlang_example();
  in.x0 = 1.5;  // queue 1/2 but no potential-queue mass
  in.patience = Distribution::exponential(1.0);
  EXPECT_THROW(validate_fluid_input(in), std::invalid_argument);
  EXPECT_THROW(solve_fluid(erlang_example(), 1.0, 0.0), std::invalid_argument);
}

TEST(Fluid, WarnsWhenHazardStepIsCoarse) {
  FluidInput in;
  in.lambda = 1.0;
  in.x0 = 1.0;
  in.patience = Distribution::exponential(200.0);
  in.nu0 = InitialMeasure::dirac(0.0, 1.0);
  const FluidTrajectory tr = solve_fluid(in, 0.1, 1e-3);
  EXPECT_FALSE(tr.warnings.empty());
}

TEST(Fluid, NuCumulativeReachesInServiceMass) {
  const FluidTrajectory tr = solve_fluid(erlang_example(), 2.0, 1e-3);
  const std::size_t n = tr.nodes() - 1;
  EXPECT_NEAR(nu_cumulative(tr, n, 100.0), tr.B[n], 1e-9);
  EXPECT_LE(nu_cumulative(tr, n, 0.5), nu_cumulative(tr, n, 1.0));
}
