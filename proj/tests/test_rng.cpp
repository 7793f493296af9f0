#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "betamix/rng.hpp"

using namespace betamix;

TEST_CASE("streams are deterministic and key-separated") {
  RngStream a(42, 1, 2, 3), b(42, 1, 2, 3), c(42, 1, 2, 4);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    all_equal = all_equal && (va == b.next_u64());
    any_diff = any_diff || (va != c.next_u64());
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("unit draws stay strictly inside (0,1)") {
  RngStream rng(7);
  double mean = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_unit();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    mean += u;
  }
  CHECK(mean / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("next_below respects the bound") {
  RngStream rng(11);
  for (int i = 0; i < 10000; ++i) CHECK(rng.next_below(7) < 7);
}

TEST_CASE("gamma moments") {
  RngStream rng(3, 0x47);
  const int n = 200000;
  for (double shape : {0.7, 1.0, 4.0, 20.0}) {
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = rng.next_gamma(shape);
      REQUIRE(g > 0.0);
      sum += g;
      sumsq += g * g;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(mean == doctest::Approx(shape).epsilon(0.02));
    CHECK(var == doctest::Approx(shape).epsilon(0.05));
  }
}

TEST_CASE("beta draws average to alpha/(alpha+delta)") {
  RngStream rng(5, 0x42);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.next_beta(2.0, 20.0);
  CHECK(sum / n == doctest::Approx(2.0 / 22.0).epsilon(0.02));
}

TEST_CASE("normal draws have unit variance") {
  RngStream rng(9);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_normal();
    sum += z;
    sumsq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sumsq / n == doctest::Approx(1.0).epsilon(0.02));
}
