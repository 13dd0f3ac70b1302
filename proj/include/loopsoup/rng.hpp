#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace loopsoup {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Independent stream keyed by (root seed, path of counters).
inline Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t k : path) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ull));
  std::seed_seq seq{std::uint32_t(h), std::uint32_t(h >> 32), std::uint32_t(splitmix64(h)),
                    std::uint32_t(splitmix64(h) >> 32)};
  return Rng(seq);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace loopsoup
