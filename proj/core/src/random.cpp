#include "manyq/random.hpp"

namespace manyq {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t replication_seed(std::uint64_t root, std::uint64_t replication) noexcept {
  return mix64(root ^ mix64(replication + 1));
}

std::uint64_t stream_seed(std::uint64_t replication_seed, StreamId stream) noexcept {
  return mix64(replication_seed ^ mix64(0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(stream)));
}

}  // namespace manyq
