#pragma once

// Spin-wave gauge: the interpolating profile upsilon(n, j), site-dependent
// shifts theta * upsilon, the quadratic cost Psi and numerical checks of the
// decay inequalities built on them.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qrotor/bridge.hpp"
#include "qrotor/energy.hpp"
#include "qrotor/gibbs.hpp"
#include "qrotor/graph.hpp"
#include "qrotor/rng.hpp"

namespace qrotor {

/// 1 for u <= 2, 1/(u ln u) beyond.
double gauge_z(double u);
/// Antiderivative of z with Z(0) = 0.
double gauge_z_primitive(double u);
/// Q(b) = int_0^b z; throws for b <= 0.
double gauge_q(double b);
/// 1(a <= 0) + 1(0 < a < b) int_a^b z / Q(b).
double gauge_vartheta(double a, double b);

struct GaugeProfile {
  std::shared_ptr<const Graph> graph;
  int n = 0;
  int rbar = 0;
  std::vector<double> theta;   // shift vector on the torus
  std::vector<double> values;  // upsilon(n, v) for every graph vertex

  double theta_norm() const;
  double upsilon(VertexId v) const { return values.at(std::size_t(v)); }
  /// True when every vertex of `sites` lies within rbar of the origin.
  bool covers(const std::vector<VertexId>& sites) const;
};

GaugeProfile gauge_profile(std::shared_ptr<const Graph> graph, int n, int rbar, std::vector<double> theta);

/// Shift each loop by sign * theta * upsilon(n, j) mod 1.
PathConfiguration apply_gauge(const GaugeProfile& profile, const PathConfiguration& cfg, int sign);

/// |theta|^2 sum over j in Lambda(n), j' coupled to j of J(d(j,j')) |upsilon_j - upsilon_j'|^2.
/// The graph must contain Lambda(n + range(J)).
double psi(const Graph& graph, const InteractionProfile& profile, int n, int rbar, double theta_norm);

struct PsiRow {
  int n = 0;
  double q = 0.0;  // Q(n - rbar)
  double psi = 0.0;
  double psi_q = 0.0;
};

/// Psi on the square lattice with nearest-neighbour J = 1 and |theta| = 1.
std::vector<PsiRow> psi_sweep(const std::vector<int>& ns, int rbar, double j = 1.0);

struct LipschitzReport {
  int n_max = 0;
  std::uint64_t pairs = 0;
  std::uint64_t violations = 0;
  double worst_slack = 0.0;  // max over pairs of lhs - rhs (<= 0 when all hold)
  bool pass = false;
};

/// Every ordered pair in Lambda(n) with d(j,o) <= d(j',o), for rbar < n <= n_max.
LipschitzReport lipschitz_check(const Graph& graph, int rbar, int n_max);

struct SphereSumRow {
  int n = 0;
  double sum = 0.0;  // sum over Lambda(n + r0) of z(d(j,o) - rbar)^2
  double q = 0.0;    // Q(n + r0 - rbar)
  double ratio = 0.0;
};

std::vector<SphereSumRow> sphere_sum_sweep(const Graph& graph, const std::vector<int>& ns, int rbar, int r0);

struct TaylorWitness {
  std::vector<double> x, xp, theta;
  double u = 0.0, up = 0.0;
  double lhs = 0.0, rhs = 0.0;
};

struct TaylorReport {
  std::uint64_t trials = 0;
  std::uint64_t violations = 0;
  double constant = 0.0;
  double max_ratio = 0.0;  // max lhs / (|theta|^2 |u - u'|^2)
  std::optional<TaylorWitness> witness;
  bool pass = false;
};

/// Explicit second-order constant: 4 pi^2 for the cosine potential; nullopt otherwise.
std::optional<double> taylor_constant(const Potential& v);

/// |V(x + theta u, x' + theta u') + V(x - theta u, x' - theta u') - 2 V(x, x')|
/// against constant * |theta|^2 |u - u'|^2 for one tuple.
TaylorWitness taylor_tuple(const Potential& v, const std::vector<double>& x, const std::vector<double>& xp,
                           const std::vector<double>& theta, double u, double up, double constant);

/// Random (x, x', theta, u, u') tuples; `constant` < 0 uses taylor_constant.
TaylorReport taylor_bound_check(const Potential& v, std::uint64_t trials, RngStream rng, double constant = -1.0);

struct ConvexityReport {
  std::size_t configurations = 0;
  std::size_t midpoint_failures = 0;
  std::size_t energy_bound_failures = 0;
  double psi = 0.0;
  double constant = 0.0;  // C in |h(g.) + h(g^-1.) - 2h| <= C Psi
  double max_second_difference = 0.0;
  double max_bound_ratio = 0.0;  // max second difference / (C Psi)
  double a = 1.05;
  bool threshold_met = false;    // a exp(-C Psi / 2) >= 1 at this n
  std::size_t full_failures = 0; // full-inequality failures when threshold_met
  bool pass = false;
};

/// Energy-level checks on sampled configurations of a model whose region is
/// Lambda(n) of the profile's graph.
ConvexityReport convexity_chain_check(const ModelSpec& model, const GaugeProfile& profile,
                                      const std::vector<PathConfiguration>& configurations, double a);

struct ThresholdRow {
  int n = 0;
  double psi = 0.0;
  double factor = 0.0;  // a exp(-C Psi / 2)
};

struct ThresholdReport {
  std::vector<ThresholdRow> rows;
  std::optional<int> n_star;  // smallest scanned n with factor >= 1
};

/// Scan n = rbar+1 .. n_max on the square lattice with NN J and C = 4 pi^2 beta J.
ThresholdReport threshold_scan(double theta_norm, double beta, double j, int rbar, int n_max, double a);

}  // namespace qrotor
