#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace txmotif {

// SplitMix64 finalizer. Used to derive independent seeds from a master seed.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// Seed for replica i of an ensemble driven by a single master seed.
// Replicas are individually reproducible: (seed, i) fully determines replica i.
inline std::uint64_t seed_for_replica(std::uint64_t seed, std::uint64_t replica_index) {
  return mix64(seed + (replica_index + 1) * 0x9E3779B97F4A7C15ULL);
}

// Deterministic random source. Wraps mt19937_64 (whose sequence is fixed by
// the standard) and provides bounded draws that avoid
// std::uniform_int_distribution and std::shuffle, whose outputs are
// implementation-defined. Equal seeds give bit-identical streams everywhere.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias. n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~0ULL - ~0ULL % n;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double real01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return real01() < p; }

  // Uniform ordered pair (i, j) with i != j, both in [0, n). n >= 2.
  std::pair<std::uint64_t, std::uint64_t> distinct_pair(std::uint64_t n) {
    std::uint64_t i = below(n);
    std::uint64_t j = below(n - 1);
    if (j >= i) ++j;
    return {i, j};
  }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace txmotif
