#pragma once

#include <cstdint>
#include <random>

#include "cftp/common.hpp"

namespace cftp {

// Deterministic 64-bit generator. std::mt19937_64 is fully specified by the
// standard, so identical seeds give identical streams on every platform.
// std::uniform_int_distribution is not portable, hence the hand-rolled
// rejection sampler below.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform in [0, n). Exact via masked rejection; consumes a geometrically
  // distributed number of variates with acceptance probability > 1/2.
  std::uint64_t below(std::uint64_t n) {
    CFTP_CHECK(n > 0, "uniform draw from an empty range");
    if ((n & (n - 1)) == 0) return gen_() & (n - 1);
    std::uint64_t mask = n - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      std::uint64_t r = gen_() & mask;
      if (r < n) return r;
    }
  }

 private:
  std::mt19937_64 gen_;
};

// SplitMix64 finalizer; used to derive per-replication seeds from a master
// seed and a counter so replications are decorrelated and reproducible.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace cftp
