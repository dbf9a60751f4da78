#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fade/ttl.h"

using namespace lethe;

TEST_CASE("single level takes the full budget") {
  TtlSchedule s;
  REQUIRE(ComputeTtls(3600, 10, 1, &s).ok());
  CHECK(s.d == std::vector<uint64_t>{3600});
}

TEST_CASE("geometric schedule sums exactly") {
  TtlSchedule s;
  REQUIRE(ComputeTtls(110, 10, 2, &s).ok());
  CHECK(s.d == std::vector<uint64_t>{10, 100});
  CHECK(s.CumulativeBudget(0) == 10);
  CHECK(s.CumulativeBudget(1) == 110);
}

TEST_CASE("sum equals the threshold across parameters") {
  for (uint64_t d_th : {7ull, 64ull, 110ull, 3600ull, 86400ull}) {
    for (uint32_t t : {2u, 4u, 10u}) {
      for (uint32_t k = 1; k <= 6; k++) {
        TtlSchedule s;
        REQUIRE(ComputeTtls(d_th, t, k, &s).ok());
        REQUIRE(s.d.size() == k);
        uint64_t sum = std::accumulate(s.d.begin(), s.d.end(), uint64_t{0});
        CHECK(sum == d_th);
        for (uint64_t ttl : s.d) CHECK(ttl >= 1);
      }
    }
  }
}

TEST_CASE("growing the tree shrinks every existing ttl") {
  // Adding a level rescales d[i] by (T^K - 1)/(T^(K+1) - 1).
  TtlSchedule a, b;
  REQUIRE(ComputeTtls(100000, 10, 3, &a).ok());
  REQUIRE(ComputeTtls(100000, 10, 4, &b).ok());
  for (size_t i = 0; i < a.d.size(); i++) {
    CHECK(b.d[i] < a.d[i]);
    double expect = static_cast<double>(a.d[i]) *
                    (std::pow(10.0, 3) - 1) / (std::pow(10.0, 4) - 1);
    CHECK(static_cast<double>(b.d[i]) == doctest::Approx(expect).epsilon(0.05));
  }
}

TEST_CASE("parameter validation") {
  TtlSchedule s;
  CHECK(ComputeTtls(0, 10, 2, &s).IsInvalidArgument());
  CHECK(ComputeTtls(100, 1, 2, &s).IsInvalidArgument());
  CHECK(ComputeTtls(100, 10, 0, &s).IsInvalidArgument());
}
