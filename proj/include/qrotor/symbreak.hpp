#pragma once

// Hard-core counterexample on the square lattice: cooled and tilted constant
// boundary loops on Sigma(n+1) and the arc probability of the origin's base
// point.

#include <cstdint>
#include <optional>
#include <vector>

#include "qrotor/gibbs.hpp"
#include "qrotor/graph.hpp"
#include "qrotor/rng.hpp"

namespace qrotor {

struct SymbreakSpec {
  int n = 2;                  // box Lambda(n) in the sup metric
  double beta = 4.0;
  int slices = 16;
  double theta_hc = 0.2;
  double x_star = 0.0;
  BoundaryKind boundary = BoundaryKind::cooled;  // cooled or tilted
  double eta = 0.0;                              // tilted only, in [0, 1]
  bool interaction = true;    // false: J = 0 (free rotors)
};

/// Z^2 sup-metric box, nearest-neighbour J = 1 on lattice edges, singular
/// cosine potential and the requested constant boundary.
ModelSpec symbreak_model(const SymbreakSpec& spec);

/// Constant loops on the outer layer Sigma(n+1).
PathConfiguration build_boundary(const SymbreakSpec& spec, const Graph& graph);

struct ArcObservable {
  double center = 0.0;
  double half_width = 0.0;
  double p = 0.0;
  double stderr_ = 0.0;
  double tau = 0.5;
  std::size_t samples = 0;
};

/// Open arc (c - w, c + w) on the circle.
bool in_arc(double x, double center, double half_width);

struct ArcRunOptions {
  std::uint64_t sweeps = 20000;
  std::int64_t burn_in = -1;
  int batches = 50;
  ChainOptions chain;
  bool chain_set = false;  // false: moves tuned to the boundary
};

struct ArcReport {
  std::vector<ArcObservable> arcs;  // one per requested center, same chain
  /// Difference arcs[0] - arcs[k] with a batch-means error of the paired series.
  std::vector<double> diff, diff_err;
  bool feasible_throughout = true;
  std::map<std::string, double> acceptance;
};

/// Arc probabilities of the origin's base point for several centers.
ArcReport arc_probability(const ModelSpec& model, const std::vector<double>& centers, double half_width,
                          const ArcRunOptions& options, RngStream rng);

/// Default chain options for a symbreak model: local moves with the shift
/// width matched to the slack of the tilted ladder.
ChainOptions symbreak_chain_options(const SymbreakSpec& spec);

struct EtaStep {
  double eta = 0.0;
  double p = 0.0;
  double err = 0.0;
};

struct EtaScanResult {
  int n = 0;
  double target = 0.0;
  double tolerance = 0.0;
  bool bracketed = false;
  bool converged = false;  // some step within tolerance, with stderr <= tolerance
  bool monotone = true;  // sorted steps non-decreasing within 3 sigma
  double eta = 0.0;      // estimate of eta-tilde(n)
  double eta_lo = 0.0;   // final bracket
  double eta_hi = 1.0;
  double p = 0.0, p_err = 0.0;
  std::vector<EtaStep> steps;
};

struct EtaScanOptions {
  double half_width = 0.005;  // arc of length 1/100
  int max_iterations = 10;
  ArcRunOptions run;
};

/// Noisy bisection on eta for P(x_0 in arc around x*) = target under the
/// tilted boundary. Reports a non-bracketing response instead of guessing.
EtaScanResult eta_scan(SymbreakSpec spec, double target, double tolerance, const EtaScanOptions& options,
                       RngStream rng);

}  // namespace qrotor
