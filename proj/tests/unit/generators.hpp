#pragma once

// Small hand-rolled generators for property tests.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "manyq/distribution.hpp"
#include "manyq/engine.hpp"
#include "manyq/random.hpp"

namespace gen {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(manyq::mix64(seed)) {}

  double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(rng_.uniform() * (hi - lo + 1)); }
  bool coin(double p = 0.5) { return rng_.uniform() < p; }
  std::uint64_t u64() { return rng_.next_u64(); }

  manyq::Distribution law() {
    switch (integer(0, 4)) {
      case 0:
        return manyq::Distribution::exponential(uniform(0.3, 3.0));
      case 1:
        return manyq::Distribution::erlang(integer(1, 4), uniform(0.5, 4.0));
      case 2: {
        const double a = uniform(0.0, 1.0);
        return manyq::Distribution::uniform(a, a + uniform(0.1, 2.0));
      }
      case 3: {
        std::vector<std::pair<double, double>> knots{{0.0, 0.0}};
        double x = 0.0, c = 0.0;
        const int n = integer(1, 4);
        for (int i = 0; i < n; ++i) {
          x += uniform(0.1, 1.5);
          c = i + 1 == n ? 1.0 : c + (1.0 - c) * uniform(0.0, 0.8);
          knots.emplace_back(x, c);
        }
        return manyq::Distribution::piecewise_linear(knots);
      }
      default:
        return manyq::Distribution::shifted(uniform(0.05, 0.5), manyq::Distribution::exponential(uniform(0.5, 3.0)));
    }
  }

  /// Sorted-insensitive ages on [0, scale), with repeated values when `ties`.
  std::vector<double> ages(std::size_t n, double scale, bool ties) {
    std::vector<double> v(n);
    for (double& a : v) {
      a = uniform(0.0, scale);
      if (ties) a = static_cast<double>(static_cast<int>(a * 4.0)) / 4.0;
    }
    return v;
  }

 private:
  manyq::RandomStream rng_;
};

/// A random model with N in [1, 6] and, with probability 3/4, abandonment.
inline manyq::ModelSpec model(Gen& g) {
  manyq::ModelSpec m;
  m.n_servers = g.integer(1, 6);
  const double rate = g.uniform(0.5, 1.5) * m.n_servers / 1.0;
  m.arrival = g.law();
  m.arrival = m.arrival.scaled(1.0 / (rate * m.arrival.mean()));
  m.service = g.law();
  if (g.coin(0.75)) m.patience = g.law();
  return m;
}

/// A consistent initial state for `m`: ages inside the supports, a queue only
/// when all servers are busy, extra eta atoms older than every queued wait.
inline manyq::InitialCondition initial(Gen& g, const manyq::ModelSpec& m) {
  manyq::InitialCondition ic;
  if (g.coin(0.3)) return ic;
  const double hs = std::min(m.service.support_end(), 3.0);
  const int busy = g.integer(0, m.n_servers);
  for (int i = 0; i < busy; ++i) ic.service_ages.push_back(g.uniform(0.0, 0.9 * hs));
  if (m.patience) {
    const double hr = std::min(m.patience->support_end(), 3.0);
    double max_wait = 0.0;
    if (busy == m.n_servers) {
      const int q = g.integer(0, 3);
      for (int i = 0; i < q; ++i) {
        ic.queue_waits.push_back(g.uniform(0.0, 0.4 * hr));
        max_wait = std::max(max_wait, ic.queue_waits.back());
      }
    }
    const int extra = g.integer(0, busy);
    for (int i = 0; i < extra; ++i) ic.extra_eta_ages.push_back(g.uniform(std::max(0.5 * hr, max_wait + 1e-6), 0.99 * hr));
  }
  ic.alpha_e = g.uniform(0.0, 0.5 * m.arrival.mean());
  ic.stationary_arrivals = g.coin(0.3);
  return ic;
}

}  // namespace gen
