#pragma once

#include <cstdint>
#include <random>

namespace smartexam {

/// splitmix64 mixing step; used to derive well-separated seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic per-replicate stream: replicate k of a run seeded with
/// `master` always sees the same engine state, independent of how replicates
/// are scheduled across threads.
inline std::mt19937_64 replicate_stream(std::uint64_t master, std::uint64_t replicate_index) {
  std::uint64_t s = master;
  (void)splitmix64(s);
  s ^= 0x51d27f8a4c2b3e96ULL * (replicate_index + 1);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(replicate_index), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

inline double uniform01(std::mt19937_64& rng) {
  // Half-open [0,1) with 53-bit resolution.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int bernoulli(std::mt19937_64& rng, double p) { return uniform01(rng) < p ? 1 : 0; }

inline double normal(std::mt19937_64& rng, double mean, double sd) {
  std::normal_distribution<double> dist(mean, sd);
  return dist(rng);
}

}  // namespace smartexam
