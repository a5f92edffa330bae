#include "manyq/mmn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace manyq {

namespace {

void check(int n, double lambda) {
  if (n < 1) throw std::invalid_argument("M/M/N needs at least one server");
  if (!(lambda > 0.0) || !(lambda < n)) throw std::invalid_argument("M/M/N pmf needs 0 < lambda < N (stability)");
}

// log p_k - log p_0.
double log_weight(int n, double lambda, std::size_t k) {
  const double kk = static_cast<double>(k);
  const double nn = static_cast<double>(n);
  if (k < static_cast<std::size_t>(n)) return kk * std::log(lambda) - std::lgamma(kk + 1.0);
  return kk * std::log(lambda) - std::lgamma(nn + 1.0) - (kk - nn) * std::log(nn);
}

// log of sum_k p_k / p_0, with the geometric tail summed in closed form.
double log_normalizer(int n, double lambda) {
  const double rho = lambda / n;
  double mx = log_weight(n, lambda, static_cast<std::size_t>(n)) - std::log1p(-rho);
  for (int i = 0; i < n; ++i) mx = std::max(mx, log_weight(n, lambda, static_cast<std::size_t>(i)));
  double s = std::exp(log_weight(n, lambda, static_cast<std::size_t>(n)) - std::log1p(-rho) - mx);
  for (int i = 0; i < n; ++i) s += std::exp(log_weight(n, lambda, static_cast<std::size_t>(i)) - mx);
  return mx + std::log(s);
}

}  // namespace

double mmn_p0(int n, double lambda) {
  check(n, lambda);
  return std::exp(-log_normalizer(n, lambda));
}

std::vector<double> mmn_stationary_pmf(int n, double lambda, std::size_t kmax) {
  check(n, lambda);
  // Weights relative to the mode, built by the birth-death ratios so that
  // consecutive entries satisfy detailed balance to a few ulps.
  const auto nn = static_cast<std::size_t>(n);
  const auto mode = std::min(static_cast<std::size_t>(lambda), nn - 1);
  const std::size_t top = std::max(kmax, nn);
  std::vector<double> w(top + 1, 0.0);
  w[mode] = 1.0;
  for (std::size_t k = mode; k > 0; --k) w[k - 1] = w[k] * static_cast<double>(k) / lambda;
  for (std::size_t k = mode; k < top; ++k) w[k + 1] = w[k] * (lambda / static_cast<double>(std::min(k + 1, nn)));
  double z = w[nn] / (1.0 - lambda / n);
  for (std::size_t k = 0; k < nn; ++k) z += w[k];
  w.resize(kmax + 1);
  for (double& v : w) v /= z;
  return w;
}

std::size_t mmn_truncation(int n, double lambda, double eps) {
  check(n, lambda);
  const double rho = lambda / n;
  const double log_tail_n = log_weight(n, lambda, static_cast<std::size_t>(n)) - log_normalizer(n, lambda) - std::log1p(-rho);
  // P(X > k) = P(X >= N) rho^{k+1-N} for k >= N-1.
  if (log_tail_n <= std::log(eps)) return static_cast<std::size_t>(n);
  const double extra = (std::log(eps) - log_tail_n) / std::log(rho);
  return static_cast<std::size_t>(n) + static_cast<std::size_t>(std::ceil(extra));
}

double mmn_tail(int n, double lambda, std::size_t k) {
  check(n, lambda);
  const double rho = lambda / n;
  const double ln = log_normalizer(n, lambda);
  const auto nn = static_cast<std::size_t>(n);
  const double from_n = std::exp(log_weight(n, lambda, nn) - ln - std::log1p(-rho));
  if (k >= nn) return from_n * std::pow(rho, static_cast<double>(k - nn));
  double s = from_n;
  for (std::size_t i = k; i < nn; ++i) s += std::exp(log_weight(n, lambda, i) - ln);
  return s;
}

double mmn_mean(int n, double lambda) {
  check(n, lambda);
  const double rho = lambda / n;
  const double ln = log_normalizer(n, lambda);
  const auto nn = static_cast<std::size_t>(n);
  double m = 0.0;
  for (std::size_t k = 1; k < nn; ++k) m += static_cast<double>(k) * std::exp(log_weight(n, lambda, k) - ln);
  const double pn = std::exp(log_weight(n, lambda, nn) - ln);
  // sum_{j>=0} (N + j) rho^j = N/(1-rho) + rho/(1-rho)^2
  m += pn * (n / (1.0 - rho) + rho / ((1.0 - rho) * (1.0 - rho)));
  return m;
}

double mmn_scaled_abs_deviation(int n, double lambda, double target) {
  const std::size_t kmax = mmn_truncation(n, lambda, 1e-17);
  const std::vector<double> p = mmn_stationary_pmf(n, lambda, kmax);
  double s = 0.0;
  for (std::size_t k = 0; k <= kmax; ++k) s += p[k] * std::abs(static_cast<double>(k) / n - target);
  return s;
}

}  // namespace manyq
