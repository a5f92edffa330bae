#pragma once

#include <cstddef>
#include <vector>

namespace manyq {

/// Stationary law of the number in system of the M/M/N queue with unit
/// service rate and arrival rate lambda < N. Computed in log space, so N in
/// the thousands is fine.
double mmn_p0(int n_servers, double lambda);
/// p_0 .. p_kmax.
std::vector<double> mmn_stationary_pmf(int n_servers, double lambda, std::size_t kmax);
/// Smallest kmax with P(X > kmax) <= eps.
std::size_t mmn_truncation(int n_servers, double lambda, double eps = 1e-16);
/// P(X >= k), geometric tail in closed form.
double mmn_tail(int n_servers, double lambda, std::size_t k);
double mmn_mean(int n_servers, double lambda);
/// E|X/N - target|.
double mmn_scaled_abs_deviation(int n_servers, double lambda, double target);

}  // namespace manyq
