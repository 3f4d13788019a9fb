#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qrotor/bridge.hpp"
#include "qrotor/stats.hpp"

using namespace qrotor;

TEST_CASE("loops close and start at x") {
  RngStream r(1);
  const TorusPoint x{0.3, 0.8};
  for (int t = 0; t < 50; ++t) {
    const LoopPath p = sample_loop(x, 1.0, 16, r);
    CHECK(p.is_loop());
    CHECK(p.start() == x);
    CHECK(p.slices() == 16);
  }
}

TEST_CASE("winding law is a discrete Gaussian") {
  RngStream r(2);
  const double beta = 1.0;
  const int n = 100000;
  int zero = 0, one = 0;
  for (int t = 0; t < n; ++t) {
    const int w = sample_winding(0.0, beta, r);
    zero += w == 0;
    one += w == 1;
  }
  double norm = 0.0;
  for (int k = -12; k <= 12; ++k) norm += std::exp(-k * k / (2 * beta));
  const double p0 = 1.0 / norm, p1 = std::exp(-0.5) / norm;
  CHECK(std::fabs(zero / double(n) - p0) < 5 * std::sqrt(p0 * (1 - p0) / n));
  CHECK(std::fabs(one / double(n) - p1) < 5 * std::sqrt(p1 * (1 - p1) / n));
}

TEST_CASE("loop winding agrees with the lifted displacement") {
  RngStream r(3);
  for (int t = 0; t < 200; ++t) {
    const LoopPath p = sample_loop(TorusPoint{0.1}, 2.0, 8, r);
    const auto lifted = p.lifted();
    CHECK(lifted.back() - lifted.front() == doctest::Approx(double(p.winding()[0])));
  }
}

TEST_CASE("euclidean bridge has exact ends and midpoint variance T/4") {
  RngStream r(4);
  const int steps = 16, n = 40000;
  const double dt = 0.125;
  double s2 = 0.0;
  for (int t = 0; t < n; ++t) {
    const auto b = euclidean_bridge(0.0, steps, dt, r);
    REQUIRE(b.size() == steps + 1);
    CHECK(b.front() == 0.0);
    CHECK(b.back() == 0.0);
    s2 += b[steps / 2] * b[steps / 2];
  }
  const double var = steps * dt / 4;
  CHECK(std::fabs(s2 / n - var) < 5 * var * std::sqrt(2.0 / n));
}

TEST_CASE("bridges hit both endpoints") {
  RngStream r(5);
  const LoopPath b = sample_bridge(TorusPoint{0.1}, TorusPoint{0.9}, 1.0, 10, r);
  CHECK(b.start()[0] == doctest::Approx(0.1));
  CHECK(b.end()[0] == doctest::Approx(0.9));
}

TEST_CASE("segment redraw keeps the complement") {
  RngStream r(6);
  const LoopPath p = sample_loop(TorusPoint{0.4}, 1.0, 16, r);
  const LoopPath q = redraw_loop_segment(p, 3, 5, r);
  for (int k = 0; k <= 16; ++k)
    if (k <= 3 || k >= 8) CHECK(q.at(k, 0) == p.at(k, 0));
  CHECK(q.is_loop());
  // a segment through slice 0 moves the base point
  const LoopPath w = redraw_loop_segment(p, 14, 6, r);
  CHECK(w.is_loop());
  CHECK(w.at(14, 0) == p.at(14, 0));
  CHECK(w.at(4, 0) == p.at(4, 0));
}

TEST_CASE("shifts invert") {
  RngStream r(7);
  const LoopPath p = sample_loop(TorusPoint{0.95}, 1.0, 8, r);
  const auto g = GroupElement::translation({0.3});
  const LoopPath back = shift_path(g.inverse(), shift_path(g, p));
  for (int k = 0; k <= 8; ++k) CHECK(circle_distance(back.at(k, 0), p.at(k, 0)) < 1e-14);
  CHECK(back.winding() == p.winding());
}

TEST_CASE("configurations") {
  PathConfiguration a, b;
  a.set(3, LoopPath::constant(TorusPoint{0.1}, 4, 1.0));
  a.set(1, LoopPath::constant(TorusPoint{0.2}, 4, 1.0));
  b.set(2, LoopPath::constant(TorusPoint{0.3}, 4, 1.0));
  CHECK(a.vertices() == std::vector<VertexId>{1, 3});
  const auto c = a.concat(b);
  CHECK(c.vertices() == std::vector<VertexId>{1, 2, 3});
  CHECK_THROWS(c.concat(b));
  const std::vector<VertexId> keep{2, 3};
  CHECK(c.restrict_to(keep).vertices() == keep);
}

TEST_CASE("dump round trip and corruption") {
  namespace fs = std::filesystem;
  const auto path = (fs::temp_directory_path() / "qrotor_unit_dump.qrcf").string();
  RngStream r(8);
  PathConfiguration cfg;
  for (VertexId v = 0; v < 3; ++v) cfg.set(v, sample_loop(TorusPoint{0.1 * v}, 1.0, 8, r));
  {
    ConfigDumpWriter w(path, "{\"k\":1}");
    w.write(10, cfg);
    w.write(20, cfg);
    w.close();
  }
  const ConfigDump d = read_config_dump(path);
  CHECK(d.header == "{\"k\":1}");
  CHECK(d.sweeps == std::vector<std::uint64_t>{10, 20});
  CHECK(d.configs[1] == cfg);

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(60);
    const char byte = 0x5a;
    f.write(&byte, 1);
  }
  CHECK_THROWS(read_config_dump(path));
  fs::resize_file(path, 30);
  CHECK_THROWS(read_config_dump(path));
  fs::remove(path);
}

TEST_CASE("midpoint of a loop at the origin follows the kernel ratio") {
  RngStream r(9);
  std::vector<double> mids;
  for (int t = 0; t < 100000; ++t) mids.push_back(sample_loop(TorusPoint{0.0}, 1.0, 2, r).at(1, 0));
  const auto ph = HeatKernelParams::for_beta(0.5);
  const double z = heat_kernel_1d(0.0, HeatKernelParams::for_beta(1.0));
  // CDF by fine midpoint quadrature of p^{1/2}(0,z)^2 / p^1(0,0)
  const int grid = 4000;
  std::vector<double> cdf(grid + 1, 0.0);
  for (int k = 0; k < grid; ++k) {
    const double q = heat_kernel_1d((k + 0.5) / grid, ph);
    cdf[k + 1] = cdf[k] + q * q / z / grid;
  }
  const auto f = [&](double x) {
    const double pos = x * grid;
    const int k = std::min(grid - 1, int(pos));
    return cdf[k] + (cdf[k + 1] - cdf[k]) * (pos - k);
  };
  CHECK(ks_statistic(mids, f) < ks_critical(mids.size(), 0.01));
}

TEST_CASE("winding ratio at beta = 4") {
  RngStream r(10);
  const int n = 100000;
  int zero = 0, plus = 0, minus = 0;
  for (int t = 0; t < n; ++t) {
    const int w = sample_loop(TorusPoint{0.0}, 4.0, 4, r).winding()[0];
    zero += w == 0;
    plus += w == 1;
    minus += w == -1;
  }
  const double expect = std::exp(-1.0 / 8);
  for (int c : {plus, minus}) {
    const double ratio = double(c) / zero;
    const double err = ratio * std::sqrt(1.0 / c + 1.0 / zero);
    CHECK(std::fabs(ratio - expect) < 3 * err);
  }
}

TEST_CASE("interior slice variance of winding-free loops") {
  RngStream r(11);
  const int L = 8;
  const double beta = 1.0;
  std::vector<double> s2(L + 1, 0.0);
  int kept = 0;
  while (kept < 100000) {
    const LoopPath p = sample_loop(TorusPoint{0.5}, beta, L, r);
    if (p.winding()[0] != 0) continue;
    ++kept;
    const auto lifted = p.lifted();
    for (int k = 1; k < L; ++k) s2[k] += (lifted[k] - lifted[0]) * (lifted[k] - lifted[0]);
  }
  for (int k : {1, 4, 6}) {
    const double tau = beta * k / L;
    const double var = tau * (beta - tau) / beta;
    CHECK(std::fabs(s2[k] / kept - var) < 3 * var * std::sqrt(2.0 / kept));
  }
}
