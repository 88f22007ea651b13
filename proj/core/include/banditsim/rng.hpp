#pragma once

#include <cstdint>
#include <random>

namespace banditsim {

/// Engine used for every stochastic choice. Always passed explicitly.
using Rng = std::mt19937_64;

/// Random-stream purposes within one replication. Streams are disjoint so that
/// changing the policy never perturbs the truth, contexts or outcome draws.
enum class Stream : std::uint64_t {
  kTruth = 1,
  kContexts = 2,
  kOutcomes = 3,
  kPolicy = 4,
  kFolds = 5,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Deterministic child seed for (seed, replication, stream).
std::uint64_t child_seed(std::uint64_t seed, std::uint64_t replication, Stream stream) noexcept;

/// Engine seeded from child_seed().
Rng child_rng(std::uint64_t seed, std::uint64_t replication, Stream stream);

/// Counter-based uniform in [0,1) keyed on (key, a, b, c). Stateless, so draws for
/// a given counter are the same regardless of which other counters were consumed.
double counter_uniform(std::uint64_t key, std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept;

}  // namespace banditsim
