#include "manyq/density_measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace manyq {

DensityMeasure DensityMeasure::equilibrium(const Distribution& law, double scale) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw std::invalid_argument("measure scale must be finite and >= 0");
  if (!std::isfinite(law.mean())) throw std::invalid_argument("equilibrium measure needs a finite mean");
  DensityMeasure m;
  m.law_ = law;
  m.scale_ = scale;
  return m;
}

DensityMeasure DensityMeasure::from_grid(std::vector<double> density, double step) {
  if (density.size() < 2 || !(step > 0.0)) throw std::invalid_argument("grid density needs >= 2 nodes and a positive step");
  for (double v : density) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("grid density must be finite and nonnegative");
  }
  DensityMeasure m;
  m.grid_ = std::move(density);
  m.step_ = step;
  m.cum_.assign(m.grid_.size(), 0.0);
  for (std::size_t i = 1; i < m.grid_.size(); ++i) {
    m.cum_[i] = m.cum_[i - 1] + 0.5 * step * (m.grid_[i - 1] + m.grid_[i]);
  }
  return m;
}

DensityMeasure DensityMeasure::zero() { return equilibrium(Distribution::exponential(1.0), 0.0); }

double DensityMeasure::total_mass() const {
  if (law_) return scale_ * law_->mean();
  return cum_.back();
}

double DensityMeasure::support_end() const {
  if (law_) return law_->support_end();
  return step_ * static_cast<double>(grid_.size() - 1);
}

double DensityMeasure::density(double x) const {
  if (x < 0.0) return 0.0;
  if (law_) return scale_ * law_->survival(x);
  const double pos = x / step_;
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= grid_.size()) return i + 1 == grid_.size() && pos == static_cast<double>(i) ? grid_.back() : 0.0;
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * grid_[i] + w * grid_[i + 1];
}

double DensityMeasure::cumulative(double x) const {
  if (x <= 0.0) return 0.0;
  if (law_) return scale_ * law_->integrated_survival(x);
  const double pos = x / step_;
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= grid_.size()) return cum_.back();
  const double w = pos - static_cast<double>(i);
  // Linear interpolation of the cumulative inside a cell, consistent with quantile().
  return cum_[i] + w * (cum_[i + 1] - cum_[i]);
}

double DensityMeasure::quantile(double q) const {
  if (q <= 0.0) return 0.0;
  const double mass = total_mass();
  if (q > mass * (1.0 + 1e-14) + 1e-300) throw std::domain_error("quantile level exceeds total mass");
  if (law_) {
    if (scale_ == 0.0) return 0.0;
    return law_->integrated_survival_inverse(std::min(q, mass) / scale_);
  }
  const auto it = std::lower_bound(cum_.begin(), cum_.end(), std::min(q, cum_.back()));
  const auto i = static_cast<std::size_t>(std::distance(cum_.begin(), it));
  if (i == 0) return 0.0;
  const double lo = cum_[i - 1];
  const double hi = cum_[i];
  const double w = (std::min(q, cum_.back()) - lo) / (hi - lo);
  return step_ * (static_cast<double>(i - 1) + w);
}

DensityMeasure equilibrium_measure(const Distribution& law, double scale) {
  return DensityMeasure::equilibrium(law, scale);
}

}  // namespace manyq
