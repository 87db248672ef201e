#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace contact_decay {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed of replicate r under a master seed:
//   splitmix64(master ^ splitmix64(r + 0x632BE59BD9B4E019))
// Distinct r give statistically independent mt19937_64 streams.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t r) {
  return splitmix64(master ^ splitmix64(r + 0x632BE59BD9B4E019ULL));
}

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double exponential(Rng& rng, double rate) {
  return -std::log1p(-uniform01(rng)) / rate;
}

// Uniform integer in [0, n) by rejection (unbiased).
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

}  // namespace contact_decay
