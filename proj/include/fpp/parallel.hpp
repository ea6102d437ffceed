#pragma once

#include <cstdint>

namespace fpp {

/// Worker count used by every OpenMP kernel in the library.
/// Defaults to FPP_WORKERS when set, otherwise the OpenMP default.
int worker_count();
void set_worker_count(int workers);

/// SplitMix64 finalizer; derives independent stream seeds from (seed, index).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
/// Used instead of std::uniform_real_distribution so that streams are
/// identical across standard library implementations.
constexpr double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace fpp
