#include "banditsim/rng.hpp"

namespace banditsim {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t child_seed(std::uint64_t seed, std::uint64_t replication, Stream stream) noexcept {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ replication);
  return mix64(h ^ static_cast<std::uint64_t>(stream));
}

Rng child_rng(std::uint64_t seed, std::uint64_t replication, Stream stream) {
  return Rng(child_seed(seed, replication, stream));
}

double counter_uniform(std::uint64_t key, std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept {
  std::uint64_t h = mix64(key);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  // 53 high bits -> [0,1)
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace banditsim
