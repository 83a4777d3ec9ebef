#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace monster {

/// SplitMix64 finalizer; a stateless mixer for counter-based streams.
constexpr uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr uint64_t hash_combine(uint64_t a, uint64_t b) { return mix64(a ^ mix64(b)); }

/// FNV-1a, stable across platforms (unlike std::hash).
constexpr uint64_t hash_tag(std::string_view tag) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Per-component seed: seed + hash(tag).
constexpr uint64_t derive_seed(uint64_t seed, std::string_view tag) {
  return mix64(seed + hash_tag(tag));
}

/// Uniform in (0,1) from a counter.
inline double counter_uniform(uint64_t seed, uint64_t counter) {
  const uint64_t bits = hash_combine(seed, counter) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

/// Standard normal sample for (seed, counter); independent of evaluation order.
inline double counter_normal(uint64_t seed, uint64_t counter) {
  const double u1 = counter_uniform(seed, 2 * counter);
  const double u2 = counter_uniform(seed, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace monster
