#pragma once

// Pair potentials on the torus, interaction profiles J(r), and the energy
// functionals of path configurations.

#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "qrotor/bridge.hpp"
#include "qrotor/graph.hpp"

namespace qrotor {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
/// Slack on the hard-core test rho <= theta_hc, absorbing rounding in exact ladders.
inline constexpr double kHardCoreSlack = 1e-12;

enum class PotentialKind { zero, cosine, singular_cosine, tabulated };

PotentialKind parse_potential_kind(std::string_view name);
std::string to_string(PotentialKind kind);

/// V(x, y) = sum_i f(x_i - y_i). Cosine: f(u) = -cos(2 pi u). Singular cosine
/// additionally returns +inf once rho(x, y) > theta_hc. Tabulated: periodic
/// linear interpolation of f on a uniform grid over [0, 1).
class Potential {
 public:
  static Potential zero(int dim = 1);
  static Potential cosine(int dim = 1);
  static Potential singular_cosine(double theta_hc, int dim = 1);
  static Potential tabulated(std::vector<double> table, int dim = 1);

  PotentialKind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool smooth() const { return kind_ != PotentialKind::singular_cosine; }
  bool is_zero() const { return kind_ == PotentialKind::zero; }
  double theta_hc() const { return theta_hc_; }
  /// Sup of |V| and its first two derivatives.
  double vbar() const { return vbar_; }

  double operator()(const TorusPoint& x, const TorusPoint& y) const;
  double eval(const double* x, const double* y) const;
  /// Hard-core admissibility of a pair of points; always true for smooth kinds.
  bool feasible(const double* x, const double* y) const;

 private:
  PotentialKind kind_ = PotentialKind::zero;
  int dim_ = 1;
  double theta_hc_ = 0.0;
  double vbar_ = 0.0;
  std::vector<double> table_;
};

enum class CouplingMetric { graph_metric, adjacency };

CouplingMetric parse_coupling_metric(std::string_view name);
std::string to_string(CouplingMetric m);

/// J(r) for r = 0, 1, ..., range; J(0) is forced to 0 (no self-interaction).
/// r is the graph's configured distance (graph_metric) or the hop distance
/// along edges (adjacency).
class InteractionProfile {
 public:
  InteractionProfile() = default;
  InteractionProfile(std::vector<double> j, CouplingMetric metric = CouplingMetric::graph_metric);
  static InteractionProfile nearest_neighbor(double j = 1.0,
                                             CouplingMetric metric = CouplingMetric::graph_metric);

  double operator()(int r) const;
  int range() const { return static_cast<int>(j_.size()) - 1; }
  CouplingMetric metric() const { return metric_; }
  const std::vector<double>& values() const { return j_; }
  bool is_zero() const;

  int distance(const Graph& g, VertexId a, VertexId b) const;
  /// Vertices within range of v, paired with J, excluding v.
  std::vector<std::pair<VertexId, double>> partners(const Graph& g, VertexId v) const;

  /// sup over `centers` of sum_j' J(d(j, j')).
  double jbar(const Graph& g, const std::vector<VertexId>& centers) const;
  /// sup over `centers` of sum_j' J(d(j, j')) d(j, j')^2.
  double jstar(const Graph& g, const std::vector<VertexId>& centers) const;

 private:
  std::vector<double> j_{0.0};
  CouplingMetric metric_ = CouplingMetric::graph_metric;
};

/// J dt [V_0/2 + V_1 + ... + V_{L-1} + V_L/2]; equals the left-endpoint sum
/// for closed loops. Returns +inf on any hard-core violation.
double pair_integral(const Potential& v, const LoopPath& a, const LoopPath& b);
double pair_energy(const InteractionProfile& profile, const Potential& v, int dist,
                   const LoopPath& a, const LoopPath& b);

/// Sum over ordered pairs of distinct vertices of the configuration.
double config_energy(const Graph& g, const InteractionProfile& profile, const Potential& v,
                     const PathConfiguration& cfg);
/// Sum over (inner, outer) pairs, each counted once.
double boundary_energy(const Graph& g, const InteractionProfile& profile, const Potential& v,
                       const PathConfiguration& inner, const PathConfiguration& outer);
double conditioned_energy(const Graph& g, const InteractionProfile& profile, const Potential& v,
                          const PathConfiguration& inner, const PathConfiguration& outer);

}  // namespace qrotor
