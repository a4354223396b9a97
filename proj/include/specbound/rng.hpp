#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace specbound {

// Deterministic substream derivation: every consumer of randomness keys its
// own engine by (root seed, string tag, integer ids). Results are therefore
// independent of execution order across samples, restarts and trials.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Engine for stream (seed, tag, i0, i1, i2).
inline std::mt19937_64 stream(std::uint64_t seed, std::string_view tag,
                              std::uint64_t i0 = 0, std::uint64_t i1 = 0,
                              std::uint64_t i2 = 0) {
  std::uint64_t s = splitmix64(seed ^ hash_tag(tag));
  s = splitmix64(s ^ i0);
  s = splitmix64(s ^ i1);
  s = splitmix64(s ^ i2);
  return std::mt19937_64(s);
}

}  // namespace rng
}  // namespace specbound
