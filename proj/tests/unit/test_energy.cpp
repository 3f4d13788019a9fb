#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qrotor/energy.hpp"

using namespace qrotor;

TEST_CASE("potential values") {
  const auto c = Potential::cosine(1);
  CHECK(c(TorusPoint{0.1}, TorusPoint{0.1}) == doctest::Approx(-1.0));
  CHECK(c(TorusPoint{0.0}, TorusPoint{0.5}) == doctest::Approx(1.0));
  const auto s = Potential::singular_cosine(0.2, 1);
  CHECK(std::isinf(s(TorusPoint{0.0}, TorusPoint{0.3})));
  CHECK(s(TorusPoint{0.0}, TorusPoint{0.15}) == doctest::Approx(-std::cos(2 * std::numbers::pi * 0.15)));
  CHECK(std::isinf(s(TorusPoint{0.95}, TorusPoint{0.7})));
  CHECK(s(TorusPoint{0.95}, TorusPoint{0.1}) == doctest::Approx(-std::cos(2 * std::numbers::pi * 0.15)));

  std::vector<double> table(64);
  for (int k = 0; k < 64; ++k) table[k] = -std::cos(2 * std::numbers::pi * k / 64.0);
  const auto t = Potential::tabulated(table, 1);
  CHECK(t(TorusPoint{0.0}, TorusPoint{0.25}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t(TorusPoint{0.0}, TorusPoint{0.3}) == doctest::Approx(c(TorusPoint{0.0}, TorusPoint{0.3})).epsilon(0.01));
  CHECK(Potential::zero(2)(TorusPoint{0.1, 0.2}, TorusPoint{0.5, 0.5}) == 0.0);
  CHECK(Potential::cosine(2)(TorusPoint{0.0, 0.0}, TorusPoint{0.0, 0.0}) == doctest::Approx(-2.0));
}

TEST_CASE("pair integral of constant loops") {
  const auto c = Potential::cosine(1);
  const auto a = LoopPath::constant(TorusPoint{0.0}, 8, 2.0);
  const auto b = LoopPath::constant(TorusPoint{0.0}, 8, 2.0);
  const auto q = LoopPath::constant(TorusPoint{0.25}, 8, 2.0);
  CHECK(pair_integral(c, a, b) == doctest::Approx(-2.0));
  CHECK(pair_integral(c, a, q) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::isinf(pair_integral(Potential::singular_cosine(0.2), a, q)));
}

TEST_CASE("profiles and partners") {
  const Graph g = build_lattice({LatticeKind::square_box, 3, Metric::graph, 3});
  const auto nn = InteractionProfile::nearest_neighbor(1.5);
  CHECK(nn(0) == 0.0);
  CHECK(nn(1) == 1.5);
  CHECK(nn(2) == 0.0);
  CHECK(nn.partners(g, g.origin()).size() == 4);
  CHECK(nn.jbar(g, {g.origin()}) == doctest::Approx(6.0));
  CHECK(nn.jstar(g, {g.origin()}) == doctest::Approx(6.0));
  const InteractionProfile two({0.0, 1.0, 0.5});
  CHECK(two.partners(g, g.origin()).size() == 12);
  CHECK(two.jbar(g, {g.origin()}) == doctest::Approx(4 + 0.5 * 8));

  const Graph s = build_lattice({LatticeKind::square_box, 3, Metric::sup, 3});
  CHECK(InteractionProfile::nearest_neighbor(1.0).partners(s, s.origin()).size() == 8);
  CHECK(InteractionProfile::nearest_neighbor(1.0, CouplingMetric::adjacency).partners(s, s.origin()).size() == 4);
  CHECK(InteractionProfile({0.0}).is_zero());
}

TEST_CASE("ordered pairs count twice, boundary pairs once") {
  const Graph g = build_chain(3);
  const auto nn = InteractionProfile::nearest_neighbor(1.0);
  const auto c = Potential::cosine(1);
  PathConfiguration inner, outer;
  inner.set(0, LoopPath::constant(TorusPoint{0.0}, 4, 1.0));
  inner.set(1, LoopPath::constant(TorusPoint{0.0}, 4, 1.0));
  outer.set(2, LoopPath::constant(TorusPoint{0.0}, 4, 1.0));
  CHECK(config_energy(g, nn, c, inner) == doctest::Approx(-2.0));
  CHECK(boundary_energy(g, nn, c, inner, outer) == doctest::Approx(-1.0));
  CHECK(conditioned_energy(g, nn, c, inner, outer) == doctest::Approx(-3.0));
}

TEST_CASE("constant configurations") {
  const Graph g = build_lattice({LatticeKind::square_box, 1, Metric::graph, 3});
  const auto nn = InteractionProfile::nearest_neighbor(1.0);
  PathConfiguration cfg;
  for (VertexId v : g.box()) cfg.set(v, LoopPath::constant(TorusPoint{0.37}, 8, 1.0));
  // box of radius 1: four edges, eight ordered pairs
  CHECK(config_energy(g, nn, Potential::cosine(1), cfg) == doctest::Approx(-8.0));

  const Graph c = build_chain(2);
  PathConfiguration in, out;
  in.set(0, LoopPath::constant(TorusPoint{0.3}, 8, 1.0));
  out.set(1, LoopPath::constant(TorusPoint{0.05}, 8, 1.0));
  CHECK(boundary_energy(c, nn, Potential::cosine(1), in, out) == doctest::Approx(-std::cos(2 * std::numbers::pi * 0.25)));
}

TEST_CASE("J sums on the square lattice") {
  const Graph g = build_lattice({LatticeKind::square_box, 4, Metric::graph, 3});
  const auto nn = InteractionProfile::nearest_neighbor(1.0);
  CHECK(nn.jbar(g, {g.origin()}) == doctest::Approx(4.0));
  CHECK(nn.jstar(g, {g.origin()}) == doctest::Approx(4.0));
}

TEST_CASE("slice refinement changes the pair integral by less than 4 Vbar beta / L") {
  RngStream r(12);
  const auto v = Potential::cosine(1);
  for (int t = 0; t < 20; ++t) {
    const LoopPath a32 = sample_loop(TorusPoint{r.uniform()}, 1.0, 32, r);
    const LoopPath b32 = sample_loop(TorusPoint{r.uniform()}, 1.0, 32, r);
    // the L = 16 path is the even-slice restriction of the L = 32 one
    auto coarse = [](const LoopPath& p) {
      std::vector<double> pts;
      std::vector<int> jumps;
      for (int k = 0; k <= 32; k += 2) pts.push_back(p.at(k, 0));
      for (int k = 0; k < 32; k += 2) jumps.push_back(p.raw_jumps()[k] + p.raw_jumps()[k + 1]);
      return LoopPath::from_raw(1, 16, p.beta(), pts, jumps);
    };
    const double fine = pair_integral(v, a32, b32);
    const double rough = pair_integral(v, coarse(a32), coarse(b32));
    CHECK(std::fabs(fine - rough) < 4 * v.vbar() * 1.0 / 16);
  }
}
