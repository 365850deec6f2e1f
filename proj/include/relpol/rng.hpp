#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace relpol {

// All randomized operations in the toolkit draw from explicit Rng streams.
// Reproducibility contract: a given (seed, label, indices) always yields the
// same stream on every platform, so components may run in parallel without
// perturbing results. std::mt19937_64 has a standard-specified sequence;
// the uniform mappings below avoid std distributions, whose output is
// implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(scramble(seed)) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n), unbiased via rejection. n must be positive.
  uint64_t uniform_int(uint64_t n) {
    if (n <= 1) return 0;
    // Smallest power-of-two mask covering n-1.
    uint64_t mask = n - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      uint64_t v = next_u64() & mask;
      if (v < n) return v;
    }
  }

  bool coin() { return (next_u64() & 1u) != 0; }

  // Derives the seed of an independent named child stream. This is the
  // documented split function: master seed -> fnv1a(label) and the index
  // arguments are folded in with splitmix64 steps.
  static uint64_t derive(uint64_t seed, std::string_view label) {
    return mix(seed ^ fnv1a(label));
  }
  static uint64_t derive(uint64_t seed, std::string_view label, uint64_t i) {
    return mix(mix(seed ^ fnv1a(label)) + 0x9e3779b97f4a7c15ull * (i + 1));
  }
  static uint64_t derive(uint64_t seed, std::string_view label, uint64_t i,
                         uint64_t j) {
    return mix(derive(seed, label, i) + 0xbf58476d1ce4e5b9ull * (j + 1));
  }

  Rng child(std::string_view label) const { return Rng(derive(seed0_, label)); }
  Rng child(std::string_view label, uint64_t i) const {
    return Rng(derive(seed0_, label, i));
  }
  Rng child(std::string_view label, uint64_t i, uint64_t j) const {
    return Rng(derive(seed0_, label, i, j));
  }

 private:
  static uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return h;
  }

  // splitmix64 finalizer.
  static uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t scramble(uint64_t seed) {
    seed0_ = seed;
    return mix(seed) | 1u;  // avoid the all-zero mt seed edge case
  }

  uint64_t seed0_ = 0;
  std::mt19937_64 eng_;
};

}  // namespace relpol
