#pragma once

#include <cstdint>

namespace leadvel {

// Deterministic random source shared by the synthetic generator and the
// resampled-KDE estimator. The algorithm is pinned so that runs are
// reproducible across platforms and ports:
//
//   state  : xoshiro256++ seeded with four consecutive splitmix64 outputs
//   unit() : [0,1) from the top 53 bits, (x >> 11) * 2^-53
//   gaussian(): Box-Muller cosine branch,
//              sqrt(-2 ln u1) * cos(2 pi u2), u1 in (0,1], u2 in [0,1)
//   index_below(n): floor(unit() * n)
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform draw in [0,1) with 53-bit resolution.
  double unit();

  double uniform(double lo, double hi);

  // Standard normal deviate. One uniform pair per call, sine branch unused.
  double gaussian();

  // Uniform integer in [0, n). n must be >= 1.
  std::uint64_t index_below(std::uint64_t n);

 private:
  std::uint64_t state_[4];
};

}  // namespace leadvel
