#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "manyq/random.hpp"

using namespace manyq;

TEST(SeedSplit, Deterministic) {
  EXPECT_EQ(replication_seed(42, 3), replication_seed(42, 3));
  EXPECT_EQ(stream_seed(7, StreamId::services), stream_seed(7, StreamId::services));
}

TEST(SeedSplit, DistinctAcrossReplicationsAndStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t root : {0ULL, 1ULL, 2ULL}) {
    for (std::uint64_t r = 0; r < 200; ++r) {
      const auto rs = replication_seed(root, r);
      for (auto s : {StreamId::arrivals, StreamId::services, StreamId::patiences, StreamId::initial}) {
        EXPECT_TRUE(seen.insert(stream_seed(rs, s)).second);
      }
    }
  }
}

TEST(RandomStream, UniformInUnitInterval) {
  RandomStream a(5), b(5);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = a.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_EQ(u, b.uniform());
    sum += u;
  }
  // mean 1/2, sd of the mean 1/sqrt(12 n)
  EXPECT_NEAR(sum / 100000, 0.5, 5.0 / std::sqrt(12.0 * 100000));
}
