#include "manyq/point_measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace manyq {

PointMeasure::PointMeasure(const std::vector<double>& ages) {
  keys_.reserve(ages.size());
  for (double a : ages) add_atom(a);
}

void PointMeasure::shift(double dt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("shift must be nonnegative");
  origin_ += dt;
}

void PointMeasure::advance_to(double origin) {
  if (origin < origin_) throw std::invalid_argument("measure origin cannot move backwards");
  origin_ = origin;
}

void PointMeasure::add_key(double key) {
  // New atoms are usually the youngest (largest key), making this an append.
  if (keys_.empty() || key >= keys_.back()) {
    keys_.push_back(key);
    return;
  }
  keys_.insert(std::upper_bound(keys_.begin(), keys_.end(), key), key);
}

void PointMeasure::remove_key(double key) {
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) throw std::invalid_argument("remove of an absent atom");
  keys_.erase(it);
}

void PointMeasure::add_atom(double age) {
  if (!(age >= 0.0) || !std::isfinite(age)) throw std::invalid_argument("atom age must be finite and nonnegative");
  add_key(origin_ - age);
}

void PointMeasure::remove_atom(double age) {
  // Ages are origin - key; match with a tolerance relative to the magnitudes involved.
  const double key = origin_ - age;
  const double tol = 1e-12 * std::max({1.0, std::abs(origin_), std::abs(age)});
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key - tol);
  if (it == keys_.end() || std::abs(*it - key) > tol) throw std::invalid_argument("remove of an absent atom");
  keys_.erase(it);
}

std::size_t PointMeasure::tail_mass(double c) const {
  // Ages descend along keys_; count the prefix with age >= c.
  auto it = std::partition_point(keys_.begin(), keys_.end(), [&](double k) { return age_of(k) >= c; });
  return static_cast<std::size_t>(std::distance(keys_.begin(), it));
}

std::size_t PointMeasure::count_at_most(double x) const {
  auto it = std::partition_point(keys_.begin(), keys_.end(), [&](double k) { return age_of(k) > x; });
  return static_cast<std::size_t>(std::distance(it, keys_.end()));
}

double PointMeasure::order_statistic(std::size_t k) const {
  if (k == 0 || k > keys_.size()) throw std::out_of_range("order statistic index out of range");
  return age_of(keys_[keys_.size() - k]);
}

double PointMeasure::quantile(double q) const {
  if (!(q >= 0.0)) throw std::domain_error("quantile level must be nonnegative");
  if (q == 0.0) return 0.0;
  const double k = std::ceil(q);
  if (k > static_cast<double>(keys_.size())) throw std::domain_error("quantile level exceeds total mass");
  return order_statistic(static_cast<std::size_t>(k));
}

std::vector<double> PointMeasure::ages() const {
  std::vector<double> out;
  out.reserve(keys_.size());
  for (auto it = keys_.rbegin(); it != keys_.rend(); ++it) out.push_back(age_of(*it));
  return out;
}

PointMeasure PointMeasure::shifted(double dt) const {
  PointMeasure copy = *this;
  copy.shift(dt);
  return copy;
}

Histogram histogram(const PointMeasure& m, const std::vector<double>& edges) {
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end())) {
    throw std::invalid_argument("histogram edges must be sorted with at least two entries");
  }
  Histogram h{edges, std::vector<double>(edges.size() - 1, 0.0)};
  for (double a : m.ages()) {
    if (a < edges.front() || a >= edges.back()) continue;
    auto it = std::upper_bound(edges.begin(), edges.end(), a);
    h.counts[static_cast<std::size_t>(std::distance(edges.begin(), it)) - 1] += 1.0;
  }
  return h;
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) throw std::invalid_argument("uniform_edges needs bins > 0 and hi > lo");
  std::vector<double> e(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  return e;
}

}  // namespace manyq
