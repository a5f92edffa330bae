#pragma once

#include <optional>

#include "manyq/distribution.hpp"
#include "manyq/fluid.hpp"

namespace manyq {

struct Interval {
  double lo;
  double hi;
  double width() const noexcept { return hi - lo; }
};

/// x -> G^r((F^{lambda eta*})^{-1}((x - 1)^+)), nondecreasing on [1, 1 + lambda theta^r].
double b_lambda_objective(const Distribution& patience, double lambda, double x);

/// The set of x solving b_lambda_objective = (lambda - 1)/lambda, located by
/// a leftmost and a rightmost bisection to x-tolerance tol. Requires
/// lambda >= 1 and a finite patience mean.
Interval compute_B_lambda(const Distribution& patience, double lambda, double tol = 1e-8);

enum class Regime { subcritical, critical_or_super };

/// Fixed points of the fluid dynamics under constant arrival rate lambda.
/// Subcritical: the single state (lambda, lambda nu*, lambda eta*).
/// Otherwise: (x, nu*, lambda eta*) for x in B_lambda.
struct InvariantSet {
  double lambda = 0.0;
  Regime regime = Regime::subcritical;
  double b_l = 0.0;
  double b_r = 0.0;
  double nu_mass = 0.0;   // lambda ^ 1
  double eta_mass = 0.0;  // lambda theta^r; +inf without abandonment
  Distribution service = Distribution::exponential(1.0);
  std::optional<Distribution> patience;
};

/// Requires unit mean service time. Throws std::invalid_argument for
/// lambda <= 0, and for lambda >= 1 without abandonment (every x >= 1 would
/// be a fixed point: the set is neither unique nor bounded).
InvariantSet invariant_manifold(double lambda, const Distribution& service, const std::optional<Distribution>& patience,
                                double tol = 1e-8);

bool is_unique(const InvariantSet& inv, double tol = 1e-8);

/// The fluid input (x, nu, eta) of the invariant state with total mass x;
/// x must lie in [b_l, b_r].
FluidInput invariant_state(const InvariantSet& inv, double x);

struct FixedPointReport {
  double x_defect = 0.0;    // sup_t |X(t) - X(0)|
  double nu_defect = 0.0;   // sup_t |<1,nu_t> - <1,nu_0>|
  double eta_defect = 0.0;  // sup_t |<1,eta_t> - <1,eta_0>|
  double max() const;
};

/// Runs the fluid solver from `state` on [0, horizon] and reports how far the
/// total masses drift. Throws std::invalid_argument for inadmissible states.
FixedPointReport verify_fixed_point(const FluidInput& state, double horizon, double delta);

}  // namespace manyq
