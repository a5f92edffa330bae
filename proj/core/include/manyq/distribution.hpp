#pragma once

#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "manyq/random.hpp"

namespace manyq {

class Distribution;

struct ExponentialLaw {
  double rate;
};

struct ErlangLaw {
  int shape;
  double rate;
};

struct UniformLaw {
  double lo;
  double hi;
};

/// Continuous cdf given by linear interpolation between knots.
struct PiecewiseLinearLaw {
  std::vector<double> x;
  std::vector<double> cdf;
};

/// Law of offset + Y, Y ~ inner. Support is (offset, offset + H_inner).
struct ShiftedLaw {
  double offset;
  std::shared_ptr<const Distribution> inner;
};

/// Equilibrium (stationary-excess) law of a base law: cdf (1/m) int_0^x (1 - F).
struct EquilibriumLaw {
  std::shared_ptr<const Distribution> base;
};

struct HazardValue {
  double value;
  bool clamped;  // survival was clamped before dividing
};

/// Lifetime law on [0, H) with a density. Immutable value type; cheap to copy.
///
/// Every kind provides cdf, survival, density, hazard, the integrated
/// survival function int_0^x (1 - G), mean and support end H. Sampling is
/// inverse-cdf for every kind.
class Distribution {
 public:
  using Kind = std::variant<ExponentialLaw, ErlangLaw, UniformLaw, PiecewiseLinearLaw, ShiftedLaw, EquilibriumLaw>;

  static Distribution exponential(double rate);
  static Distribution erlang(int shape, double rate);
  static Distribution uniform(double lo, double hi);
  /// Knots (x_i, c_i): x_0 = 0, c_0 = 0, x strictly increasing, c
  /// nondecreasing, c_last = 1.
  static Distribution piecewise_linear(std::vector<std::pair<double, double>> knots);
  static Distribution shifted(double offset, Distribution inner);

  const Kind& kind() const noexcept { return kind_; }

  double cdf(double x) const;
  double survival(double x) const;
  double density(double x) const;
  /// g(x)/(1 - G(x)). Throws std::domain_error when G(x) = 1.
  double hazard(double x) const;
  HazardValue hazard_checked(double x) const;

  double mean() const noexcept { return mean_; }
  double second_moment() const;
  double support_end() const noexcept { return support_end_; }

  /// int_0^x (1 - G(y)) dy.
  double integrated_survival(double x) const;
  /// Smallest x with integrated_survival(x) >= y, for 0 <= y <= mean.
  double integrated_survival_inverse(double y) const;

  /// Generalized inverse inf{x : G(x) >= p}.
  double quantile(double p) const;
  /// Smallest x with survival(x) <= s, for 0 < s <= 1.
  double inverse_survival(double s) const;

  double sample(RandomStream& rng) const;
  /// Draw of (X - age) conditioned on X > age, i.e. from g(age + .)/(1 - G(age)).
  double sample_residual(double age, RandomStream& rng) const;

  /// Law of factor * X.
  Distribution scaled(double factor) const;

  std::string describe() const;

  friend bool operator==(const Distribution& a, const Distribution& b);

 private:
  friend Distribution equilibrium_interarrival(const Distribution& d);
  explicit Distribution(Kind kind);

  Kind kind_;
  double mean_ = 0.0;
  double support_end_ = std::numeric_limits<double>::infinity();
};

/// F_0(t) = lambda int_0^t (1 - F(y)) dy with lambda = 1 / mean(d): the law of
/// the backward (and forward) recurrence time of a stationary renewal process.
Distribution equilibrium_interarrival(const Distribution& d);

}  // namespace manyq
