#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace coreset {

using Seed = std::uint64_t;
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream splitting: the stream for (seed, a, b, ...) does not
/// depend on the order in which streams are created or consumed.
inline Seed derive_seed(Seed seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(Seed seed, std::initializer_list<std::uint64_t> path = {}) {
  return Rng(derive_seed(seed, path));
}

// Stream tags keep the sub-streams of one pipeline apart.
namespace stream {
inline constexpr std::uint64_t subspace = 1;
inline constexpr std::uint64_t reduction = 2;
inline constexpr std::uint64_t index_draw = 3;
inline constexpr std::uint64_t residuals = 4;
inline constexpr std::uint64_t regression = 5;
inline constexpr std::uint64_t leverage = 6;
inline constexpr std::uint64_t lewis = 7;
inline constexpr std::uint64_t sampling = 8;
inline constexpr std::uint64_t seeding = 9;
inline constexpr std::uint64_t validation = 10;
inline constexpr std::uint64_t retry = 11;
inline constexpr std::uint64_t queries = 12;
inline constexpr std::uint64_t gaussian = 13;
}  // namespace stream

}  // namespace coreset
