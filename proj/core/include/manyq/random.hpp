#pragma once

#include <cstdint>
#include <random>

namespace manyq {

/// Independent random streams of one replication.
enum class StreamId : std::uint64_t { arrivals = 1, services = 2, patiences = 3, initial = 4 };

/// SplitMix64 finalizer; used for all seed derivation.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed split rule: root -> replication -> stream.
///
///   replication_seed = mix64(root ^ mix64(replication + 1))
///   stream_seed      = mix64(replication_seed ^ mix64(0x9e37... * stream))
///
/// Distinct (replication, stream) pairs give statistically independent
/// mt19937_64 sequences; the rule is fixed so results replay bit-for-bit.
std::uint64_t replication_seed(std::uint64_t root, std::uint64_t replication) noexcept;
std::uint64_t stream_seed(std::uint64_t replication_seed, StreamId stream) noexcept;

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits. Platform independent, unlike
  /// std::uniform_real_distribution.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t next_u64() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace manyq
