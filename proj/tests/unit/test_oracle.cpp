#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qrotor/oracle.hpp"
#include "qrotor/rdm.hpp"
#include "qrotor/stats.hpp"

using namespace qrotor;

namespace {
ModelSpec chain_model(int k, Potential v, double j) {
  auto g = std::make_shared<const Graph>(build_chain(k + 2));
  ModelSpec m;
  m.graph = g;
  for (int s = 1; s <= k; ++s) m.region.push_back(s);
  m.beta = 1.0;
  m.slices = 8;
  m.potential = v;
  m.profile = InteractionProfile::nearest_neighbor(j);
  m.boundary = Boundary::cooled(TorusPoint{0.0});
  return m;
}
}  // namespace

TEST_CASE("periodic integrals") {
  std::vector<double> ones(16, 1.0);
  CHECK(periodic_integral(ones, 0.1, 0.35) == doctest::Approx(0.25));
  std::vector<double> c(32);
  for (int a = 0; a < 32; ++a) c[a] = std::cos(2 * std::numbers::pi * a / 32.0);
  CHECK(periodic_integral(c, 0.0, 0.25) == doctest::Approx(1.0 / (2 * std::numbers::pi)));
  const auto pb = bin_probabilities(ones, 4);
  for (double p : pb) CHECK(p == doctest::Approx(0.25));
}

TEST_CASE("decoupled site reduces to the free kernel") {
  const ModelSpec m = chain_model(1, Potential::zero(1), 1.0);
  OracleOptions o;
  o.m = 64;
  o.kernel_sites = {1};
  const auto r = transfer_matrix_oracle(m, o);
  for (double v : r.marginal[0]) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
  for (int a : {0, 5, 17})
    for (int b : {0, 9, 40}) {
      const KernelPair p{{TorusPoint{a / 64.0}}, {TorusPoint{b / 64.0}}};
      CHECK(r.kernel(a, b) == doctest::Approx(free_kernel(p, 1.0)).epsilon(1e-8));
    }
}

TEST_CASE("cooled cosine site concentrates at the anchor") {
  const ModelSpec m = chain_model(1, Potential::cosine(1), 1.0);
  OracleOptions o;
  o.m = 32;
  const auto r = transfer_matrix_oracle(m, o);
  CHECK(r.marginal[0][0] > r.marginal[0][16]);
  CHECK(periodic_integral(r.marginal[0], 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("oracle limits") {
  ModelSpec m = chain_model(3, Potential::cosine(1), 1.0);
  OracleOptions o;
  o.m = 32;
  CHECK_THROWS_AS(transfer_matrix_oracle(m, o), std::length_error);
  m = chain_model(4, Potential::cosine(1), 1.0);
  o.m = 4;
  CHECK_THROWS_AS(transfer_matrix_oracle(m, o), std::invalid_argument);
}

TEST_CASE("partition function of a free site") {
  auto g = std::make_shared<const Graph>(build_chain(1));
  ModelSpec m;
  m.graph = g;
  m.region = {0};
  m.potential = Potential::zero(1);
  m.boundary = Boundary::free();
  OracleOptions o;
  o.m = 64;
  const auto r = transfer_matrix_oracle(m, o);
  CHECK(std::fabs(r.xi - 0.9999997) < 1e-6);
}

TEST_CASE("two coupled sites: grid convergence and alignment") {
  ModelSpec m = chain_model(2, Potential::cosine(1), 1.0);
  m.boundary = Boundary::free();
  m.slices = 8;
  OracleOptions o;
  o.m = 32;
  const double xi32 = transfer_matrix_oracle(m, o).xi;
  o.m = 64;
  const auto fine = transfer_matrix_oracle(m, o);
  CHECK(fine.xi == doctest::Approx(xi32).epsilon(1e-4));
  // attractive alignment raises the partition function above the free value
  ModelSpec zero = m;
  zero.potential = Potential::zero(1);
  CHECK(fine.xi > transfer_matrix_oracle(zero, o).xi);
}

TEST_CASE("two-site marginal against the sampler") {
  const ModelSpec m = chain_model(2, Potential::cosine(1), 1.0);
  OracleOptions o;
  o.m = 64;
  const auto orc = transfer_matrix_oracle(m, o);
  const int bins = 10;
  RunOptions ro;
  ro.sweeps = 100000;
  ro.track_energy = false;
  std::vector<int> series;
  mcmc_run(m, ro, RngStream(21), [&](std::uint64_t, const GibbsChain& c) { series.push_back(bin_of(c.path(0).at(0, 0), bins)); });
  const auto be = binned_marginal(series, bins);
  CHECK(tv_distance(be.p, bin_probabilities(orc.marginal[0], bins)) < 0.02);
}

TEST_CASE("one cooled site: sampler marginal within 3 sigma") {
  const ModelSpec m = chain_model(1, Potential::cosine(1), 1.0);
  OracleOptions o;
  o.m = 128;
  const auto pb = bin_probabilities(transfer_matrix_oracle(m, o).marginal[0], 5);
  RunOptions ro;
  ro.sweeps = 100000;
  ro.track_energy = false;
  std::vector<int> series;
  mcmc_run(m, ro, RngStream(22), [&](std::uint64_t, const GibbsChain& c) { series.push_back(bin_of(c.path(0).at(0, 0), 5)); });
  const auto be = binned_marginal(series, 5);
  for (int b = 0; b < 5; ++b) CHECK(std::fabs(be.p[b] - pb[b]) < 3.5 * be.err[b]);
}
