#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "qrotor/symbreak.hpp"

using namespace qrotor;

TEST_CASE("model shape") {
  SymbreakSpec s;
  s.n = 2;
  const ModelSpec m = symbreak_model(s);
  CHECK(m.region.size() == 25);
  CHECK(m.graph->metric() == Metric::sup);
  CHECK(m.potential.kind() == PotentialKind::singular_cosine);
  CHECK(m.profile.metric() == CouplingMetric::adjacency);
  s.interaction = false;
  CHECK(symbreak_model(s).profile.is_zero());
  s.theta_hc = 0.3;
  CHECK_THROWS(symbreak_model(s));
}

TEST_CASE("boundary ladders") {
  SymbreakSpec s;
  s.n = 2;
  s.x_star = 0.5;
  const ModelSpec m = symbreak_model(s);
  const Graph& g = *m.graph;
  const auto cooled = build_boundary(s, g);
  CHECK(cooled.size() == g.boundary_layer().size());
  s.boundary = BoundaryKind::tilted;
  s.eta = 0.0;
  CHECK(build_boundary(s, g) == cooled);
  s.eta = 1.0;
  const auto full = build_boundary(s, g);
  for (VertexId v : g.boundary_layer()) {
    const double expect = wrap01(0.5 + 0.2 * g.coord(v)[0]);
    CHECK(circle_distance(full.at(v).at(0, 0), expect) < 1e-12);
  }
  // horizontal neighbours on the ladder differ by exactly theta_hc
  const auto a = *g.find({3, 0}), b = *g.find({3, 1}), c = *g.find({-3, 3}), d = *g.find({-2, 3});
  CHECK(circle_distance(full.at(a).at(0, 0), full.at(b).at(0, 0)) < 1e-12);
  CHECK(circle_distance(full.at(c).at(0, 0), full.at(d).at(0, 0)) == doctest::Approx(0.2));
}

TEST_CASE("arcs") {
  CHECK(in_arc(0.99, 0.0, 0.02));
  CHECK_FALSE(in_arc(0.5, 0.0, 0.1));
  CHECK_FALSE(in_arc(0.1, 0.0, 0.1));
}

TEST_CASE("free rotors spread uniformly") {
  SymbreakSpec s;
  s.n = 1;
  s.interaction = false;
  ArcRunOptions o;
  o.sweeps = 20000;
  const auto r = arc_probability(symbreak_model(s), {0.0, 0.5}, 0.1, o, RngStream(1));
  CHECK(std::fabs(r.arcs[0].p - 0.2) < 4 * r.arcs[0].stderr_);
  CHECK(std::fabs(r.arcs[1].p - 0.2) < 4 * r.arcs[1].stderr_);
  CHECK(r.feasible_throughout);
}

TEST_CASE("cooled boundary pins the origin") {
  SymbreakSpec s;
  s.n = 1;
  ArcRunOptions o;
  o.sweeps = 40000;
  const auto r = arc_probability(symbreak_model(s), {0.0, 0.5}, 0.1, o, RngStream(2));
  CHECK(r.arcs[0].p > 2 * 0.2);
  CHECK(r.arcs[1].p == 0.0);
  CHECK(r.diff[1] > 5 * r.diff_err[1]);
}

TEST_CASE("eta scan argument checks and the frozen ladder") {
  SymbreakSpec s;
  s.n = 1;
  EtaScanOptions o;
  CHECK_THROWS(eta_scan(s, 1.5, 0.02, o, RngStream(3)));
  CHECK_THROWS(eta_scan(s, 0.5, 0.0, o, RngStream(3)));
  s.boundary = BoundaryKind::tilted;
  s.eta = 1.0;
  const auto co = symbreak_chain_options(s);
  CHECK_FALSE(co.stall_check);
  CHECK(co.moves.shift_width == doctest::Approx(1e-3));
}

TEST_CASE("the eta = 1 ladder is frozen") {
  SymbreakSpec s;
  s.n = 1;
  s.boundary = BoundaryKind::tilted;
  s.eta = 1.0;
  ArcRunOptions o;
  o.sweeps = 2000;
  o.chain = symbreak_chain_options(s);
  o.chain_set = true;
  const auto r = arc_probability(symbreak_model(s), {0.0}, 0.005, o, RngStream(4));
  CHECK(r.arcs[0].p == 1.0);
  CHECK(r.feasible_throughout);
}

TEST_CASE("co-shifted anchors give equal arc probabilities") {
  // the model family is covariant: with common randomness the co-shifted
  // runs coincide sample by sample
  SymbreakSpec a, b;
  a.n = b.n = 1;
  b.x_star = 0.3;
  ArcRunOptions o;
  o.sweeps = 5000;
  const auto ra = arc_probability(symbreak_model(a), {0.0, 0.5}, 0.1, o, RngStream(5));
  const auto rb = arc_probability(symbreak_model(b), {0.3, 0.8}, 0.1, o, RngStream(5));
  CHECK(ra.arcs[0].p == doctest::Approx(rb.arcs[0].p).epsilon(1e-12));
  CHECK(ra.arcs[1].p == doctest::Approx(rb.arcs[1].p).epsilon(1e-12));
}

TEST_CASE("widened arc at n = 3 exceeds twice the uniform baseline") {
  SymbreakSpec s;
  s.n = 3;
  ArcRunOptions o;
  o.sweeps = 8000;
  const auto r = arc_probability(symbreak_model(s), {0.0}, 0.1, o, RngStream(7));
  CHECK(r.arcs[0].p > 0.4);
}
