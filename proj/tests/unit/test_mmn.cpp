#include <gtest/gtest.h>

#include <cmath>
#include <gmpxx.h>

#include "manyq/mmn.hpp"

using namespace manyq;

namespace {

// Exact unnormalized weights w_k = p_k / p_0 for integer lambda.
mpq_class exact_weight(int n, long lambda, std::size_t k) {
  mpq_class w = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    w *= lambda;
    w /= std::min<long>(static_cast<long>(i), n);
  }
  return w;
}

// Exact p_0 with the geometric tail summed in closed form.
mpq_class exact_p0(int n, long lambda) {
  mpq_class s = 0;
  for (int k = 0; k < n; ++k) s += exact_weight(n, lambda, static_cast<std::size_t>(k));
  const mpq_class rho(lambda, n);
  s += exact_weight(n, lambda, static_cast<std::size_t>(n)) / (1 - rho);
  return 1 / s;
}

}  // namespace

TEST(Mmn, P0ForTwoServers) {
  EXPECT_DOUBLE_EQ(mmn_p0(2, 1.0), 1.0 / 3.0);
  EXPECT_EQ(exact_p0(2, 1), mpq_class(1, 3));
}

TEST(Mmn, DetailedBalanceAgainstExactRationals) {
  for (const auto& [n, lambda] : {std::pair{2, 1L}, {5, 4L}, {10, 7L}, {40, 39L}}) {
    const auto kmax = static_cast<std::size_t>(3 * n + 1);
    const std::vector<double> p = mmn_stationary_pmf(n, static_cast<double>(lambda), kmax);
    const mpq_class p0 = exact_p0(n, lambda);
    for (std::size_t k = 0; k <= kmax; ++k) {
      const mpq_class pk = p0 * exact_weight(n, lambda, k);
      ASSERT_NEAR(p[k] / pk.get_d(), 1.0, 1e-12) << "n=" << n << " k=" << k;
      if (k < kmax) {
        // exact detailed balance of the oracle itself
        const mpq_class pk1 = p0 * exact_weight(n, lambda, k + 1);
        ASSERT_EQ(lambda * pk, std::min<long>(static_cast<long>(k + 1), n) * pk1);
      }
    }
  }
}

TEST(Mmn, TailMeanAndTruncation) {
  const int n = 10;
  const double lambda = 9.0;
  const std::size_t kmax = mmn_truncation(n, lambda, 1e-16);
  const std::vector<double> p = mmn_stationary_pmf(n, lambda, kmax + 2000);
  double total = 0.0, mean = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    total += p[k];
    mean += static_cast<double>(k) * p[k];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(mmn_mean(n, lambda), mean, 1e-9);
  double tail = 0.0;
  for (std::size_t k = 15; k < p.size(); ++k) tail += p[k];
  EXPECT_NEAR(mmn_tail(n, lambda, 15), tail, 1e-12);
  EXPECT_NEAR(mmn_tail(n, lambda, 0), 1.0, 1e-12);
  EXPECT_LE(mmn_tail(n, lambda, kmax + 1), 1e-16 * 1.0001);
}

TEST(Mmn, LargeNIsFinite) {
  const std::vector<double> p = mmn_stationary_pmf(1000, 999.0, 3000);
  for (double v : p) ASSERT_TRUE(std::isfinite(v));
  double total = 0.0;
  for (double v : p) total += v;
  EXPECT_NEAR(total + mmn_tail(1000, 999.0, 3001), 1.0, 1e-12);
  EXPECT_EQ(mmn_p0(1000, 999.0), 0.0);  // below the double range
  EXPECT_NEAR(mmn_tail(1000, 999.0, 1500), 0.5829, 1e-3);
}

TEST(Mmn, RejectsUnstable) {
  EXPECT_THROW(mmn_p0(2, 2.0), std::invalid_argument);
  EXPECT_THROW(mmn_p0(0, 0.5), std::invalid_argument);
}

TEST(Mmn, InterchangeBoundHolds) {
  for (int n : {2, 5, 10, 30, 100, 300, 1000}) {
    const double lambda = n - 1.0;
    const auto threshold = static_cast<std::size_t>(std::ceil(1.5 * n));
    EXPECT_LE(mmn_tail(n, lambda, threshold), std::pow((n - 1.0) / n, n / 2.0)) << n;
  }
}
