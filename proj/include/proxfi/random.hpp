#pragma once

// Random streams. Every chain owns an mt19937_64 seeded from (seed, stream id)
// through SplitMix64, so streams are independent of scheduling order.

#include <cstdint>
#include <random>

#include "proxfi/targets.hpp"

namespace proxfi {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ splitmix64(stream);
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s)),
                    static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s))};
  return Rng(seq);
}

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline Vector standard_normal(int d, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vector z(d);
  for (int i = 0; i < d; ++i) z(i) = n01(rng);
  return z;
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace proxfi
