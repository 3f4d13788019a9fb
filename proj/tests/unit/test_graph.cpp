#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>
#include <thread>

#include "qrotor/graph.hpp"

using namespace qrotor;

TEST_CASE("square box sizes in both metrics") {
  const Graph g = build_lattice({LatticeKind::square_box, 3, Metric::graph, 3});
  CHECK(g.box().size() == 2 * 9 + 2 * 3 + 1);
  CHECK(g.boundary_layer().size() == 16);
  const Graph s = build_lattice({LatticeKind::square_box, 3, Metric::sup, 3});
  CHECK(s.box().size() == 49);
  CHECK(s.boundary_layer().size() == 32);
}

TEST_CASE("distances") {
  const Graph g = build_lattice({LatticeKind::square_box, 4, Metric::graph, 3});
  const Graph s = build_lattice({LatticeKind::square_box, 4, Metric::sup, 3});
  const auto a = *g.find({0, 0}), b = *g.find({2, -1});
  CHECK(g.distance(a, b) == 3);
  CHECK(s.distance(*s.find({0, 0}), *s.find({2, -1})) == 2);
  CHECK(s.hop_distance(*s.find({0, 0}), *s.find({2, -1})) == 3);
  CHECK(g.distance(a, a) == 0);
  for (VertexId v : g.sphere(g.origin(), 2)) CHECK(g.distance(g.origin(), v) == 2);
  CHECK(g.sphere(g.origin(), 2).size() == 8);
}

TEST_CASE("ring and chain") {
  const Graph r = build_lattice({LatticeKind::ring, 8, Metric::graph, 3});
  CHECK(r.size() == 8);
  CHECK(r.distance(0, 4) == 4);
  CHECK(r.distance(0, 7) == 1);
  CHECK(r.boundary_layer().empty());
  const Graph c = build_chain(5);
  CHECK(c.size() == 5);
  CHECK(c.degree(0) == 1);
  CHECK(c.degree(2) == 2);
  CHECK(c.distance(0, 4) == 4);
}

TEST_CASE("bi-dimensionality") {
  const Graph g = build_lattice({LatticeKind::square_box, 12, Metric::graph, 3});
  const auto rep = verify_bidimensional(g, 10);
  CHECK(rep.pass);
  CHECK(rep.max_degree == 4);
  CHECK(rep.sphere_ratio_sup == doctest::Approx(4.0));
  const Graph t = build_regular_tree(3, 9);
  CHECK_FALSE(verify_bidimensional(t, 8).pass);
}

TEST_CASE("edge csv lists both orientations") {
  const Graph c = build_chain(3);
  std::ostringstream os;
  c.write_edge_csv(os);
  CHECK(os.str() == "src,dst\n0,1\n1,0\n1,2\n2,1\n");
}

TEST_CASE("concurrent distance queries agree") {
  const Graph g = build_lattice({LatticeKind::square_box, 6, Metric::graph, 3});
  std::vector<int> sums(4, 0);
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < 4; ++t)
      pool.emplace_back([&, t] {
        int s = 0;
        for (VertexId v = 0; v < VertexId(g.size()); ++v) s += g.distance(v, g.origin());
        sums[t] = s;
      });
  }
  for (int t = 1; t < 4; ++t) CHECK(sums[t] == sums[0]);
}

TEST_CASE("bad names throw") {
  CHECK_THROWS(parse_lattice_kind("hexagonal"));
  CHECK_THROWS(parse_metric("taxicab"));
  CHECK(parse_lattice_kind("ring") == LatticeKind::ring);
}

TEST_CASE("sphere counts") {
  const Graph g2 = build_lattice({LatticeKind::square_box, 2, Metric::graph, 3});
  CHECK(g2.sphere(g2.origin(), 2).size() == 8);
  const Graph s1 = build_lattice({LatticeKind::square_box, 1, Metric::sup, 3});
  CHECK(s1.sphere(s1.origin(), 1).size() == 8);
  const Graph g3 = build_lattice({LatticeKind::square, 3, Metric::graph, 3});
  CHECK(g3.sphere(g3.origin(), 3).size() == 12);
  const Graph t1 = build_lattice({LatticeKind::triangular, 1, Metric::graph, 3});
  CHECK(t1.sphere(t1.origin(), 1).size() == 6);
  const Graph tree = build_regular_tree(3, 4);
  for (int n = 1; n <= 4; ++n) CHECK(tree.sphere(tree.origin(), n).size() == std::size_t(3 << (n - 1)));
}

TEST_CASE("bi-dimensional ratios on large boxes") {
  const Graph g = build_lattice({LatticeKind::square_box, 33, Metric::graph, 3});
  const auto rep = verify_bidimensional(g, 32);
  CHECK(rep.pass);
  CHECK(rep.sphere_ratio_sup == doctest::Approx(4.0));
  CHECK_FALSE(verify_bidimensional(build_regular_tree(3, 10), 10).pass);
}
