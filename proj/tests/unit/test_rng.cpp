#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "qrotor/rng.hpp"

using namespace qrotor;

TEST_CASE("streams are reproducible and keyed") {
  RngStream a(7, {1, 2}), b(7, {1, 2}), c(7, {1, 3}), d(8, {1, 2});
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}

TEST_CASE("substreams do not advance the parent") {
  RngStream a(3), b(3);
  (void)a.substream(5);
  (void)a.substream({5, 6});
  CHECK(a() == b());
  CHECK(a.substream(4)() == b.substream(4)());
  CHECK(a.substream({4, 1})() != a.substream({1, 4})());
}

TEST_CASE("uniform and normal moments") {
  RngStream r(11);
  const int n = 200000;
  double s = 0, s2 = 0, g = 0, g2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    s += u;
    s2 += u * u;
    const double z = r.normal();
    g += z;
    g2 += z * z;
  }
  CHECK(std::fabs(s / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
  CHECK(std::fabs(s2 / n - 1.0 / 3) < 0.005);
  CHECK(std::fabs(g / n) < 5 / std::sqrt(double(n)));
  CHECK(std::fabs(g2 / n - 1.0) < 0.02);
}

TEST_CASE("bounded integers") {
  RngStream r(5);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) ++counts[r.below(6)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}
