#include "doctest.h"

#include <cmath>
#include <vector>

#include "leadvel/rng.hpp"

using namespace leadvel;

TEST_SUITE_BEGIN("rng");

TEST_CASE("identical seeds give identical streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
}

TEST_CASE("different seeds diverge") {
  Rng a(1), b(2);
  int equal = 0;
  for (int i = 0; i < 64; ++i) {
    if (a.next_u64() == b.next_u64()) ++equal;
  }
  CHECK(equal == 0);
}

TEST_CASE("unit draws stay in [0,1)") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform covers the requested interval") {
  Rng rng(11);
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.uniform(-2.0, 2.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    CHECK(v >= -2.0);
    CHECK(v < 2.0);
  }
  CHECK(lo < -1.9);
  CHECK(hi > 1.9);
}

TEST_CASE("gaussian has roughly standard moments") {
  Rng rng(13);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sum_sq += g * g;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.01);
  CHECK(std::fabs(var - 1.0) < 0.02);
}

TEST_CASE("index_below spans its range without escaping it") {
  Rng rng(17);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 10000; ++i) {
    const auto idx = rng.index_below(10);
    REQUIRE(idx < 10);
    counts[static_cast<size_t>(idx)] += 1;
  }
  for (int c : counts) CHECK(c > 800);
}

TEST_SUITE_END();
