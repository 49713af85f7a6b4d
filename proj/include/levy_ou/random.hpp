#pragma once

#include <cstdint>
#include <random>

namespace levy_ou {

using Rng = std::mt19937_64;

/// Deterministic child seed for task `index` of an ensemble seeded by `master`.
/// Ensemble results depend only on (master, index), never on worker count.
inline std::uint64_t sub_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over a golden-ratio stride
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace levy_ou
