#pragma once

#include <cstdint>

namespace mixkern {

/// splitmix64 finalizer: a bijective mixer with good avalanche behaviour.
/// Used to derive independent sub-seeds from a master seed and integer
/// counters (replication index, sample-size index, individual index, ...)
/// so parallel replications are order-independent and reproducible.
inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based seed derivation: fold each counter into the state with one
/// splitmix64 round.  Pure function of (master, counters...), independent of
/// evaluation order across replications.
inline std::uint64_t derive_seed(std::uint64_t master) noexcept { return splitmix64(master); }

template <class... Rest>
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k, Rest... rest) noexcept {
  return derive_seed(splitmix64(master ^ splitmix64(k)), rest...);
}

}  // namespace mixkern
