#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace diversenet {

// Derives an independent stream seed from (seed, tag) via splitmix64.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

// Deterministic RNG. The engine (mt19937_64) is fully specified by the
// standard; the distribution transforms are hand-rolled here so sampled
// sequences are pinned by this code and reproduce bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller, one variate per call (two engine steps).
  double normal(double mean, double sd);

  // Uniform integer in [0, n); n must be > 0.
  std::size_t below(std::size_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // First k slots of a partial Fisher-Yates over 0..n-1.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace diversenet
