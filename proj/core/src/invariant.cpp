#include "manyq/invariant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace manyq {

double b_lambda_objective(const Distribution& patience, double lambda, double x) {
  const double y = std::max(x - 1.0, 0.0);
  if (y == 0.0) return patience.cdf(0.0);
  const double total = lambda * patience.mean();
  if (y >= total) return 1.0;
  return patience.cdf(patience.integrated_survival_inverse(y / lambda));
}

Interval compute_B_lambda(const Distribution& patience, double lambda, double tol) {
  if (!(lambda >= 1.0) || !std::isfinite(lambda)) throw std::invalid_argument("B_lambda needs a finite lambda >= 1");
  if (!std::isfinite(patience.mean())) throw std::invalid_argument("B_lambda needs a finite mean patience time");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const double target = (lambda - 1.0) / lambda;
  const double lo0 = 1.0;
  const double hi0 = 1.0 + lambda * patience.mean();
  if (!(b_lambda_objective(patience, lambda, hi0) >= target)) {
    throw std::invalid_argument("B_lambda target unreachable within [1, 1 + lambda theta^r]");
  }

  constexpr int kChecks = 1000;
  double prev = b_lambda_objective(patience, lambda, lo0);
  for (int i = 1; i <= kChecks; ++i) {
    const double x = lo0 + (hi0 - lo0) * i / kChecks;
    const double v = b_lambda_objective(patience, lambda, x);
    if (v < prev - 1e-12) throw std::logic_error("B_lambda objective is not monotone on the bracket");
    prev = v;
  }

  // Leftmost root: objective(lo) < target <= objective(hi).
  double left;
  if (b_lambda_objective(patience, lambda, lo0) >= target) {
    left = lo0;
  } else {
    double lo = lo0, hi = hi0;
    while (hi - lo > tol * 0.01) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (b_lambda_objective(patience, lambda, mid) >= target ? hi : lo) = mid;
    }
    left = hi;
  }
  // Rightmost root: objective(lo) <= target < objective(hi).
  double lo = left, hi = hi0;
  if (b_lambda_objective(patience, lambda, hi) <= target) return {left, hi0};
  while (hi - lo > tol * 0.01) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (b_lambda_objective(patience, lambda, mid) <= target ? lo : hi) = mid;
  }
  return {left, lo};
}

InvariantSet invariant_manifold(double lambda, const Distribution& service, const std::optional<Distribution>& patience,
                                double tol) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("invariant manifold needs lambda > 0");
  if (std::abs(service.mean() - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "invariant manifold assumes unit mean service time, got " << service.mean();
    throw std::invalid_argument(os.str());
  }
  InvariantSet inv;
  inv.lambda = lambda;
  inv.service = service;
  inv.patience = patience;
  inv.nu_mass = std::min(lambda, 1.0);
  inv.eta_mass = patience ? lambda * patience->mean() : std::numeric_limits<double>::infinity();
  if (lambda < 1.0) {
    inv.regime = Regime::subcritical;
    inv.b_l = inv.b_r = lambda;
    return inv;
  }
  if (!patience) {
    throw std::invalid_argument(
        "non-unique/undefined invariant state: without abandonment every x >= 1 is a fixed point when lambda >= 1");
  }
  inv.regime = Regime::critical_or_super;
  const Interval b = compute_B_lambda(*patience, lambda, tol);
  inv.b_l = b.lo;
  inv.b_r = b.hi;
  return inv;
}

bool is_unique(const InvariantSet& inv, double tol) {
  return inv.regime == Regime::subcritical || inv.b_r - inv.b_l <= tol;
}

FluidInput invariant_state(const InvariantSet& inv, double x) {
  if (x < inv.b_l - 1e-12 || x > inv.b_r + 1e-12) throw std::invalid_argument("x outside B_lambda");
  FluidInput in;
  in.lambda = inv.lambda;
  in.service = inv.service;
  in.patience = inv.patience;
  in.x0 = x;
  in.nu0 = InitialMeasure::from_density(equilibrium_measure(inv.service, inv.nu_mass));
  if (inv.patience) in.eta0 = InitialMeasure::from_density(equilibrium_measure(*inv.patience, inv.lambda));
  return in;
}

double FixedPointReport::max() const { return std::max({x_defect, nu_defect, eta_defect}); }

FixedPointReport verify_fixed_point(const FluidInput& state, double horizon, double delta) {
  const FluidTrajectory tr = solve_fluid(state, horizon, delta);
  FixedPointReport r;
  const double b0 = state.nu0.total_mass();
  const double e0 = tr.eta_mass.front();
  for (std::size_t n = 0; n < tr.nodes(); ++n) {
    r.x_defect = std::max(r.x_defect, std::abs(tr.X[n] - state.x0));
    r.nu_defect = std::max(r.nu_defect, std::abs(tr.B[n] - b0));
    if (state.patience) r.eta_defect = std::max(r.eta_defect, std::abs(tr.eta_mass[n] - e0));
  }
  return r;
}

}  // namespace manyq
