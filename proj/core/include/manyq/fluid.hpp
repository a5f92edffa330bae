#pragma once

#include <optional>
#include <string>
#include <vector>

#include "manyq/density_measure.hpp"
#include "manyq/distribution.hpp"

namespace manyq {

struct Atom {
  double position;
  double mass;
};

/// Finite initial measure for the fluid equations: point masses plus an
/// optional absolutely continuous part.
struct InitialMeasure {
  std::vector<Atom> atoms;
  std::optional<DensityMeasure> density;

  static InitialMeasure zero() { return {}; }
  static InitialMeasure dirac(double position, double mass = 1.0) { return {{{position, mass}}, std::nullopt}; }
  static InitialMeasure from_density(DensityMeasure d) { return {{}, std::move(d)}; }

  double total_mass() const;
  /// mu[0, x].
  double cumulative(double x) const;
};

/// An initial measure transported for time t with survival weights
/// (1 - G(x + t)) / (1 - G(x)) of a lifetime law. Positions refer to the
/// original measure, so an atom at x now sits at x + t.
class TransportedMeasure {
 public:
  TransportedMeasure(const InitialMeasure& m, const Distribution& law, double t);

  double elapsed() const noexcept { return t_; }
  /// int (1 - G(x+t)) / (1 - G(x)) m(dx)
  double mass() const;
  /// int g(x+t) / (1 - G(x)) m(dx): the outflow rate.
  double hazard_mass() const;
  /// Surviving mass of original positions in [0, a].
  double cumulative(double a) const;
  /// Original position at which the surviving cumulative first reaches q.
  double quantile(double q) const;
  /// int_0^q h(position of level y) dy: hazard integrated over the first q
  /// units of surviving mass, including a partial atom at the boundary.
  double hazard_up_to_level(double q) const;

 private:
  double cont_cum(double a) const;
  double cont_hcum(double a) const;
  double cont_inverse(double q) const;

  double t_;
  Distribution law_;
  // Atoms after survival weighting, ascending position.
  std::vector<double> atom_x_, atom_w_, atom_hw_;
  // Continuous part: closed form (density c * (1 - G) of the same law) or grid.
  enum class ContKind { none, analytic, grid } kind_ = ContKind::none;
  double scale_ = 0.0;
  double step_ = 0.0;
  std::vector<double> cum_, hcum_;
};

/// The potential-queue fluid measure eta_t: new arrivals with density
/// lambda (1 - G^r(x)) on [0, t] plus the transported initial measure on
/// [t, H).
class EtaProfile {
 public:
  EtaProfile(const InitialMeasure& eta0, double lambda, const Distribution& patience, double t);

  double time() const noexcept { return t_; }
  double total_mass() const;
  double cumulative(double x) const;
  double quantile(double q) const;
  /// int_0^q h^r((F^eta)^{-1}(y)) dy.
  double reneging_rate(double q) const;

 private:
  double t_;
  double lambda_;
  Distribution patience_;
  double new_mass_;
  TransportedMeasure init_;
};

/// eta_t from eta_0 under constant arrival rate lambda. Independent of the
/// service law.
EtaProfile eta_evolve(const InitialMeasure& eta0, double lambda, const Distribution& patience, double t);

/// int_0^{[x - 1]^+} h^r((F^eta)^{-1}(y)) dy for a fluid state (x, eta).
/// Throws std::domain_error if the queue exceeds the mass of eta.
double reneging_rate(double x, const EtaProfile& eta);
double reneging_rate(double x, const DensityMeasure& eta, const Distribution& patience);

struct FluidInput {
  double lambda = 1.0;
  double x0 = 0.0;
  InitialMeasure nu0;
  InitialMeasure eta0;
  Distribution service = Distribution::exponential(1.0);
  std::optional<Distribution> patience;  // nullopt: no abandonment
};

/// Checks membership in the space of admissible fluid inputs; throws
/// std::invalid_argument naming the failed condition.
void validate_fluid_input(const FluidInput& in, double tol = 1e-6);

/// Fluid solution on the grid t_n = n * delta. Entries into service during
/// [t_n, t_{n+1}) are lumped at the midpoint; in-service mass and the
/// service hazard flux are evaluated exactly for that discrete entry history.
struct FluidTrajectory {
  double delta = 0.0;
  std::vector<double> t, X, Q, B, K, R, D, eta_mass, hs_nu;
  std::vector<double> entries;  // e_n: mass entering service during [t_n, t_{n+1})
  FluidInput input;
  std::vector<std::string> warnings;

  std::size_t nodes() const noexcept { return t.size(); }
};

FluidTrajectory solve_fluid(const FluidInput& in, double horizon, double delta);

/// nu_t[0, a] and eta_t[0, a] at grid node n.
double nu_cumulative(const FluidTrajectory& traj, std::size_t n, double a);
double eta_cumulative(const FluidTrajectory& traj, std::size_t n, double a);

/// Largest node-wise violation of each fluid identity.
struct FluidDefects {
  double non_idling = 0.0;         // |1 - B - [1 - X]^+|
  double conservation = 0.0;       // |Q(0) + lambda t - Q - K - R|
  double queue_identity = 0.0;     // |Q - [X - 1]^+|
  double eta_bound = 0.0;          // [Q - <1, eta>]^+
  double departure_balance = 0.0;  // |X - X(0) - lambda t + int <h^s, nu> + R|, trapezoidal integral
  double max() const;
};

FluidDefects fluid_defects(const FluidTrajectory& traj);

/// Renewal density u solving u = g + g * u on t_n = n * delta, n = 0..steps,
/// by the trapezoidal rule.
std::vector<double> renewal_density(const Distribution& service, double delta, std::size_t steps);

/// K recomputed from the key-renewal representation using the trajectory's
/// in-service mass and initial service measure.
std::vector<double> solve_K_renewal(const FluidTrajectory& traj);

}  // namespace manyq
