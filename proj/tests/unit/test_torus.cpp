#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qrotor/torus.hpp"

using namespace qrotor;

namespace {
// Fourier side of the image sum: 1 + 2 sum_k exp(-2 pi^2 k^2 beta) cos(2 pi k x).
double fourier_kernel(double x, double beta) {
  double s = 1.0;
  for (int k = 1; k < 200; ++k)
    s += 2.0 * std::exp(-2.0 * std::numbers::pi * std::numbers::pi * k * k * beta) *
         std::cos(2.0 * std::numbers::pi * k * x);
  return s;
}
}  // namespace

TEST_CASE("wrapping") {
  CHECK(wrap01(-0.25) == doctest::Approx(0.75));
  CHECK(wrap01(3.5) == doctest::Approx(0.5));
  CHECK(wrap01(1.0) == 0.0);
  CHECK(wrap_centered(0.75) == doctest::Approx(-0.25));
  CHECK(wrap_centered(0.5) == doctest::Approx(-0.5));
  CHECK(circle_distance(0.9, 0.1) == doctest::Approx(0.2));
  CHECK(torus_distance(TorusPoint{0.1, 0.5}, TorusPoint{0.95, 0.2}) == doctest::Approx(0.3));
}

TEST_CASE("heat kernel matches its Fourier series") {
  for (double beta : {0.05, 0.25, 1.0, 3.0})
    for (double x : {0.0, 0.1, 0.37, 0.5, 0.9, -2.3}) {
      const auto p = HeatKernelParams::for_beta(beta);
      CHECK(heat_kernel_1d(x, p) == doctest::Approx(fourier_kernel(x, beta)).epsilon(1e-11));
    }
}

TEST_CASE("derivative against central differences") {
  const auto p = HeatKernelParams::for_beta(0.3);
  for (double x : {0.05, 0.2, 0.45, 0.7}) {
    const double h = 1e-6;
    const double fd = (heat_kernel_1d(x + h, p) - heat_kernel_1d(x - h, p)) / (2 * h);
    CHECK(heat_kernel_1d_derivative(x, p) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("truncation rule") {
  CHECK(default_truncation(1.0) == int(std::ceil(1.0 + std::sqrt(2.0 * std::log(1e12)))));
  const auto p = HeatKernelParams::for_beta(2.0, 1e-8);
  CHECK(p.tail_bound() <= 1e-8);
  HeatKernelParams bad{1.0, 1, 1e-12};
  CHECK_THROWS(bad.validate());
  HeatKernelParams neg{-1.0, 5, 1e-12};
  CHECK_THROWS(neg.validate());
}

TEST_CASE("product kernel in two dimensions") {
  const auto p = HeatKernelParams::for_beta(0.5);
  const TorusPoint x{0.1, 0.2}, y{0.7, 0.25};
  CHECK(heat_kernel(x, y, p) ==
        doctest::Approx(fourier_kernel(0.6, 0.5) * fourier_kernel(0.05, 0.5)).epsilon(1e-11));
  CHECK(heat_kernel_sup(1.0, 1) >= heat_kernel_1d(0.0, HeatKernelParams::for_beta(1.0)));
}

TEST_CASE("group elements") {
  using R = GroupElement::Rational;
  CHECK(matrix_rank({{R(1), R(2)}, {R(2), R(4)}}) == 1);
  CHECK(matrix_rank({{R(1), R(0)}, {R(1, 2), R(1)}}) == 2);
  CHECK_THROWS(GroupElement({0.1, 0.2}, {{R(1), R(2)}, {R(2), R(4)}}));

  const GroupElement g({0.3}, {{R(1), R(1, 2)}});
  CHECK(g.dim() == 2);
  CHECK(g.shift()[1] == doctest::Approx(0.15));
  const TorusPoint x{0.9, 0.95};
  const TorusPoint y = act(g, x);
  CHECK(y[0] == doctest::Approx(0.2));
  CHECK(y[1] == doctest::Approx(0.1));
  const TorusPoint back = act_inv(g, y);
  CHECK(back[0] == doctest::Approx(0.9));
  CHECK(back[1] == doctest::Approx(0.95));
  CHECK(g.norm() == doctest::Approx(std::hypot(0.3, 0.15)));
  CHECK(g.scaled(0.5).shift()[0] == doctest::Approx(0.15));
}

TEST_CASE("diagonal value and grid normalization") {
  const auto p = HeatKernelParams::for_beta(1.0);
  CHECK(std::fabs(heat_kernel_1d(0.0, p) - 0.9999997) < 1e-6);
  const auto h = HeatKernelParams::for_beta(0.5);
  double s = 0.0;
  for (int k = 0; k < 512; ++k) s += heat_kernel_1d(0.3 - (k + 0.5) / 512, h);
  CHECK(std::fabs(s / 512 - 1.0) < 1e-6);
}
