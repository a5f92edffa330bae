#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "manyq/engine.hpp"
#include "manyq/fluid.hpp"
#include "manyq/invariant.hpp"

namespace manyq {

/// A family of N-server models with arrival rate lambda^(N) = round(lambda_bar N).
/// The arrival law is rescaled to mean 1 / lambda^(N); service and patience
/// laws are used as given.
struct ScaledModel {
  double lambda_bar = 1.0;
  Distribution arrival_law = Distribution::exponential(1.0);
  Distribution service = Distribution::exponential(1.0);
  std::optional<Distribution> patience;
  bool stationary_arrivals = true;

  long arrival_rate(int n_servers) const;
  ModelSpec model(int n_servers) const;
};

struct Statistic {
  double mean = 0.0;
  double half_width = 0.0;  // 95% Student-t half-width
  std::size_t samples = 0;
};

/// Mean and 95% half-width of i.i.d. (or batch-mean) samples.
Statistic summarize(const std::vector<double>& samples);

struct StationaryOptions {
  double horizon = 1000.0;
  double warmup = -1.0;  // negative: 20% of the horizon
  int replications = 1;
  std::uint64_t seed = 1;
  int batches = 20;
  bool audit = true;
  std::uint64_t max_events = 500'000'000;
  double snapshot_dt = 0.0;      // > 0 enables tail profiles and self-consistency checks
  std::vector<double> tail_grid;  // c values
  unsigned threads = 1;

  double effective_warmup() const { return warmup < 0.0 ? 0.2 * horizon : warmup; }
};

/// Tail masses at level c and the stationary self-consistency relation
///   E eta*[c, H) = E int S^r(x + 2c)/S^r(x) eta*(dx) + E int_0^c S^r(2c - s) dE(s)
/// and its service-side analogue with K in place of E. All values scaled by 1/N.
struct TailPoint {
  double c = 0.0;
  Statistic eta_tail;
  Statistic nu_tail;
  Statistic eta_residual;  // lhs - rhs of the eta relation
  Statistic nu_residual;
};

struct StationaryEstimate {
  int n_servers = 0;
  double lambda_abs = 0.0;
  double warmup = 0.0;
  double horizon = 0.0;
  int replications = 0;
  std::vector<std::uint64_t> replication_seeds;
  std::vector<std::uint64_t> trajectory_hashes;
  Statistic x_bar;    // X / N
  Statistic nu_bar;   // <1, nu> / N
  Statistic eta_bar;  // <1, eta> / N
  std::vector<double> x_pmf;  // time-weighted law of X
  std::vector<TailPoint> tails;
  std::uint64_t events = 0;
  std::uint64_t audit_violations = 0;
  std::string first_violation;
  bool states_ok = true;  // <1,nu> <= N and X >= <1,nu> at every event
};

StationaryEstimate estimate_stationary(const ModelSpec& model, const InitialCondition& initial,
                                       const StationaryOptions& options);

/// |E <1, eta*> - lambda_bar theta^r| / (lambda_bar theta^r).
double littles_law_check(const StationaryEstimate& est, double lambda_bar, double theta_r);

/// E <f, eta_t> = int f(x+t) S^r(x+t)/S^r(x) eta_0(dx) + int_0^t f(t-s) S^r(t-s) de(s)
/// with the Stieltjes integral evaluated by a midpoint rule on `steps` cells.
double mean_eta_formula(const InitialMeasure& eta0, const std::function<double(double)>& e, const Distribution& patience,
                        const std::function<double(double)>& f, double t, std::size_t steps = 20000);
/// Same with the service law and the mean entry function k.
double mean_nu_formula(const InitialMeasure& nu0, const std::function<double(double)>& k, const Distribution& service,
                       const std::function<double(double)>& f, double t, std::size_t steps = 20000);

struct RepresentationRow {
  std::string side;  // "eta" or "nu"
  std::string f;     // "1" or "1[c,inf)" label
  double c = 0.0;    // cutoff; 0 for f = 1
  double t = 0.0;
  double empirical = 0.0;
  double predicted = 0.0;
  double z = 0.0;
};

struct RepresentationReport {
  std::vector<RepresentationRow> rows;
  double max_abs_z = 0.0;
};

/// Empty-start M/G/N+G runs with Poisson arrivals. The eta side is compared
/// against the closed formula with e(t) = lambda t; the nu side against the
/// formula evaluated on each replication's own entry history (paired).
RepresentationReport representation_check(const ModelSpec& model, const std::vector<double>& times,
                                          const std::vector<double>& cutoffs, int replications, std::uint64_t seed,
                                          unsigned threads = 1);

struct ConvergenceRow {
  int n_servers = 0;
  StationaryEstimate estimate;
  double x_target = 0.0;
  double x_distance = 0.0;
  double littles_deviation = 0.0;
};

struct ConvergenceReport {
  InvariantSet invariant;
  std::vector<ConvergenceRow> rows;
  /// Distance to the invariant state is nonincreasing in N up to CI overlap.
  bool monotone = true;
};

/// Throws std::invalid_argument when the invariant manifold is not a
/// single point (see interchange_demo for that case).
ConvergenceReport convergence_study(const ScaledModel& scaled, const std::vector<int>& n_list,
                                    const std::function<StationaryOptions(int)>& options_for);

struct InterchangeRow {
  int n_servers = 0;
  double lambda_abs = 0.0;
  std::size_t threshold = 0;  // ceil(1.5 N)
  double tail_exact = 0.0;    // P(X/N >= 3/2)
  double bound = 0.0;         // ((N-1)/N)^{N/2}
  double mean_scaled = 0.0;   // E X / N
  double w1_to_fluid = 0.0;   // E |X/N - 2|
};

struct InterchangeReport {
  std::vector<InterchangeRow> rows;
  double fluid_sup_deviation = 0.0;          // sup_t |X(t) - 2|, no abandonment
  double fluid_abandonment_deviation = 0.0;  // same with patience supported in (3, inf), on [0, 3]
  double fluid_horizon = 0.0;
  double bound_limit = 0.0;        // e^{-1/2}, the limit of ((N-1)/N)^{N/2}
  double quoted_limit = 0.0;       // e^{-2}, the constant usually quoted for this example
  double w1_limit = 0.0;           // 2/e
  double probability_gap = 0.0;    // 1 - P(X/N >= 3/2) at the largest N
  double min_w1 = 0.0;             // min over N of E|X/N - 2|
};

InterchangeReport interchange_demo(const std::vector<int>& n_list, double fluid_horizon = 10.0, double delta = 1e-3);

}  // namespace manyq
