#pragma once

#include <optional>
#include <vector>

#include "manyq/distribution.hpp"

namespace manyq {

/// Finite measure on [0, H) with a density.
///
/// Two representations: the analytic form scale * (1 - G(x)) dx built from a
/// lifetime law (the equilibrium measures nu*, eta* and their multiples), and
/// a tabulated density on a uniform grid [0, x_max]. Cumulative values of the
/// grid form use trapezoidal sums; its quantile inverts the cumulative array
/// by binary search with linear interpolation inside a cell.
class DensityMeasure {
 public:
  static DensityMeasure equilibrium(const Distribution& law, double scale);
  static DensityMeasure from_grid(std::vector<double> density, double step);
  static DensityMeasure zero();

  double total_mass() const;
  double density(double x) const;
  /// mu[0, x].
  double cumulative(double x) const;
  /// inf{x >= 0 : mu[0, x] >= q}; 0 for q = 0. Throws std::domain_error when
  /// q exceeds the total mass.
  double quantile(double q) const;
  /// Right end of the support (H, or x_max for a grid).
  double support_end() const;

  bool is_analytic() const noexcept { return law_.has_value(); }
  const std::optional<Distribution>& law() const noexcept { return law_; }
  double scale() const noexcept { return scale_; }
  const std::vector<double>& grid_density() const noexcept { return grid_; }
  double grid_step() const noexcept { return step_; }

 private:
  DensityMeasure() = default;

  std::optional<Distribution> law_;
  double scale_ = 0.0;
  std::vector<double> grid_;
  std::vector<double> cum_;
  double step_ = 0.0;
};

/// Measure with density scale * (1 - G(x)); total mass scale * mean(G).
DensityMeasure equilibrium_measure(const Distribution& law, double scale);

}  // namespace manyq
