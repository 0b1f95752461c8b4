#pragma once

#include <cmath>
#include <cstdint>

namespace knotint {

// splitmix64 counter stream. Cheap to construct, so every Monte-Carlo sample
// gets its own stream keyed by (seed, sample index); results then do not
// depend on how samples are distributed over threads.
struct Rng {
  uint64_t state = 0;
  bool has_cached_normal = false;
  double cached_normal = 0.0;

  explicit Rng(uint64_t s) : state(s) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in [0, 1), never exactly 0 (safe for logs)
  double uniform_pos() {
    double u = uniform();
    return u > 0.0 ? u : 0x1.0p-53;
  }

  double normal() {
    if (has_cached_normal) {
      has_cached_normal = false;
      return cached_normal;
    }
    double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    double t = 6.283185307179586476925286766559 * uniform();
    cached_normal = r * std::sin(t);
    has_cached_normal = true;
    return r * std::cos(t);
  }
};

inline uint64_t mix_seed(uint64_t seed, uint64_t index) {
  uint64_t z = seed ^ (0x9e3779b97f4a7c15ull * (index + 0x633d5c4b775a37e5ull));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline Rng sample_stream(uint64_t seed, uint64_t index) {
  return Rng(mix_seed(seed, index));
}

}  // namespace knotint
