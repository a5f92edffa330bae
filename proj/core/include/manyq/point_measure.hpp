#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace manyq {

/// Finite sum of unit Dirac atoms on [0, H): the age measures nu_t and eta_t.
///
/// Atoms are stored as birth keys with a common origin; an atom's age is
/// origin - key. Translating every atom (shift) only moves the origin, so
/// simulation time can advance in O(1) without accumulating rounding error in
/// the atoms themselves. Keys are kept sorted ascending, i.e. ages descending.
class PointMeasure {
 public:
  PointMeasure() = default;
  explicit PointMeasure(const std::vector<double>& ages);

  std::size_t mass() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }

  /// Translate every atom by dt >= 0.
  void shift(double dt);
  /// Set the origin directly (engine clock); must not move backwards.
  void advance_to(double origin);
  double origin() const noexcept { return origin_; }

  void add_atom(double age);
  /// Removes one atom at `age`; throws std::invalid_argument if absent.
  void remove_atom(double age);

  void add_key(double key);
  void remove_key(double key);
  std::span<const double> keys() const noexcept { return keys_; }

  /// Number of atoms in [c, H).
  std::size_t tail_mass(double c) const;
  /// Number of atoms in [0, x].
  std::size_t count_at_most(double x) const;
  /// inf{x >= 0 : m[0, x] >= q}; 0 for q = 0. Throws std::domain_error when
  /// q exceeds the mass.
  double quantile(double q) const;

  /// k-th smallest age, k in [1, mass].
  double order_statistic(std::size_t k) const;
  /// Ages in ascending order.
  std::vector<double> ages() const;

  /// Copy translated by dt (a snapshot at a later time).
  PointMeasure shifted(double dt) const;

 private:
  double age_of(double key) const noexcept { return origin_ - key; }

  double origin_ = 0.0;
  std::vector<double> keys_;
};

struct Histogram {
  std::vector<double> edges;        // size bins + 1
  std::vector<double> counts;       // size bins
};

/// Histogram of atom ages over [edges_0, edges_last); atoms past the last edge
/// are dropped.
Histogram histogram(const PointMeasure& m, const std::vector<double>& edges);
std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

}  // namespace manyq
