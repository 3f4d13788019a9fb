#pragma once

// Finite-volume FK-DLR measures over loop configurations and a Metropolis
// sampler whose proposals are drawn from (or preserve) the free loop measure.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qrotor/bridge.hpp"
#include "qrotor/energy.hpp"
#include "qrotor/graph.hpp"
#include "qrotor/rng.hpp"
#include "qrotor/stats.hpp"

namespace qrotor {

enum class BoundaryKind { free, loops, cooled, tilted };

BoundaryKind parse_boundary_kind(std::string_view name);
std::string to_string(BoundaryKind kind);

struct Boundary {
  BoundaryKind kind = BoundaryKind::free;
  PathConfiguration loops;  // kind == loops
  TorusPoint x_star{1};     // cooled / tilted anchor
  double eta = 0.0;         // tilted
  double theta_hc = 0.0;    // tilted step size

  static Boundary free();
  static Boundary from_loops(PathConfiguration cfg);
  static Boundary cooled(const TorusPoint& x_star);
  static Boundary tilted(const TorusPoint& x_star, double eta, double theta_hc);
};

/// Base point of vertex v under a tilted boundary: x* + j_1 eta theta_hc in
/// the first torus coordinate, j_1 the first lattice coordinate of v.
TorusPoint tilted_point(const Graph& g, VertexId v, const TorusPoint& x_star, double eta,
                        double theta_hc);

struct ModelSpec {
  std::shared_ptr<const Graph> graph;
  std::vector<VertexId> region;  // Lambda; kept sorted
  int dim = 1;
  double beta = 1.0;
  int slices = 16;
  Potential potential = Potential::cosine(1);
  InteractionProfile profile = InteractionProfile::nearest_neighbor();
  Boundary boundary;
  /// Boundary vertices that belong to an enclosing volume (conditioning on
  /// part of a larger region). Bonds to them count in both orientations, as
  /// inside h of that volume; bonds to ordinary boundary vertices count once.
  std::vector<VertexId> internal_boundary;

  /// Throws on inconsistent data.
  void validate() const;
  bool in_region(VertexId v) const;
  /// Vertices outside the region coupled to it.
  std::vector<VertexId> coupled_outside() const;
};

/// Whole-box model: region = graph.box().
ModelSpec box_model(std::shared_ptr<const Graph> graph, int dim, double beta, int slices,
                    Potential potential, InteractionProfile profile, Boundary boundary);

/// The boundary realised as paths on every coupled vertex outside the region.
PathConfiguration resolve_boundary(const ModelSpec& model);

/// h(cfg | boundary paths) with the model's bond weights.
double model_energy(const ModelSpec& model, const PathConfiguration& cfg, const PathConfiguration& boundary_paths);

/// Flattened bond list of a model: region pairs (a < b, weight 2J) and
/// region-boundary pairs (weight J, or 2J for internal boundary vertices).
struct BondTable {
  struct Bond {
    std::size_t a;
    std::size_t b;  // region index, or boundary index for outer bonds
    double weight;
  };
  std::vector<Bond> inner;
  std::vector<Bond> outer;
  PathConfiguration boundary;

  static BondTable build(const ModelSpec& model);
  /// Energy of region paths given in region order; +inf on hard-core violation.
  double energy(const Potential& v, const std::vector<const LoopPath*>& paths) const;
  /// Only the bonds touching region indices with touch[idx] = true.
  double energy_touching(const Potential& v, const std::vector<const LoopPath*>& paths,
                         const std::vector<bool>& touch) const;
};

/// -h(cfg | boundary); -inf on a hard-core violation.
double log_unnormalized_density(const ModelSpec& model, const PathConfiguration& cfg);

struct MoveMix {
  double free = 1.0;     // fresh loop from the free measure
  double shift = 0.0;    // rigid shift by a uniform step in [-w, w]^d
  double segment = 0.0;  // redraw a cyclic bridge segment
  double shift_width = 0.05;
  int segment_max = 0;   // 0: L/2
  /// free only for smooth potentials, local moves only for hard cores.
  static MoveMix defaults_for(const Potential& v);
};

struct ChainOptions {
  MoveMix moves;
  bool moves_set = false;        // false: MoveMix::defaults_for(potential)
  bool stall_check = true;
  int stall_window = 2000;       // sweeps without any acceptance before failing
  bool random_start = true;      // smooth free/loops boundaries start from free loops
};

class GibbsChain {
 public:
  GibbsChain(ModelSpec model, RngStream rng, ChainOptions options = {});

  /// Start from an explicit configuration over the region.
  void set_state(const PathConfiguration& cfg);
  /// One move per region vertex, in region order.
  void sweep();

  const ModelSpec& model() const { return model_; }
  const std::vector<VertexId>& region() const { return model_.region; }
  const LoopPath& path(std::size_t idx) const { return paths_[idx]; }
  PathConfiguration state() const;
  const PathConfiguration& boundary_paths() const { return boundary_; }
  /// h(state | boundary), recomputed from scratch.
  double energy() const;
  /// Every coupled pair is feasible at every slice.
  bool feasible() const;

  std::uint64_t sweeps_done() const { return sweeps_; }
  std::vector<double> acceptance() const;
  std::map<std::string, double> acceptance_by_move() const;

 private:
  struct Partner {
    bool inner;
    std::size_t index;  // region index or boundary index
    double weight;      // 2J for inner partners, J for boundary partners
  };
  void build_tables();
  void initial_state();
  double local_energy(std::size_t idx, const LoopPath& p) const;
  bool try_move(std::size_t idx);

  ModelSpec model_;
  RngStream rng_;
  ChainOptions options_;
  PathConfiguration boundary_;
  std::vector<LoopPath> boundary_list_;
  std::vector<LoopPath> paths_;
  std::vector<std::vector<Partner>> partners_;
  std::vector<std::uint64_t> proposed_, accepted_;
  std::array<std::uint64_t, 3> move_proposed_{}, move_accepted_{};
  std::uint64_t sweeps_ = 0;
  std::uint64_t last_accept_sweep_ = 0;
};

struct RunOptions {
  std::uint64_t sweeps = 10000;
  std::int64_t burn_in = -1;  // -1: 20% of sweeps
  std::uint64_t thin = 1;
  bool track_energy = true;
  ChainOptions chain;
};

struct ChainStats {
  std::uint64_t sweeps = 0;
  std::uint64_t burn_in = 0;
  std::vector<double> acceptance;           // per region vertex
  std::map<std::string, double> autocorr;   // observable -> tau_int
  std::map<std::string, double> acceptance_by_move;
};

struct RunResult {
  ChainStats stats;
  std::vector<double> energy_trace;  // post burn-in, per recorded sweep
};

using Observer = std::function<void(std::uint64_t sweep, const GibbsChain& chain)>;

/// Runs burn-in, then calls `observer` every `thin` sweeps.
RunResult mcmc_run(const ModelSpec& model, const RunOptions& options, RngStream rng,
                   const Observer& observer = {});
RunResult mcmc_run(GibbsChain& chain, const RunOptions& options, const Observer& observer = {});

std::uint64_t resolve_burn_in(const RunOptions& options);

/// Bin index of a base-point coordinate on `bins` equal bins of [0, 1).
int bin_of(double x, int bins);

struct DlrOptions {
  std::uint64_t sweeps = 20000;
  std::uint64_t resample_every = 10;     // full-chain sweeps between two-stage draws
  std::uint64_t conditional_sweeps = 40; // burn-in of each conditional resample
  int bins = 10;
  int batches = 50;
  ChainOptions chain;
};

struct DlrReport {
  BinnedEstimate direct;
  BinnedEstimate two_stage;
  double tv = 0.0;
  TvNull null;
  double z = 0.0;   // (tv - null.mean) / null.sd
  bool pass = false;  // tv <= null.mean + 3 null.sd
  std::size_t two_stage_samples = 0;
};

/// Compares the Lambda^0 base-point marginal of the full chain with the
/// two-stage scheme that resamples Lambda' from its conditional law given the
/// full chain's configuration outside Lambda'. Bins the first coordinate of
/// each Lambda^0 vertex jointly (bins^|Lambda^0| cells).
DlrReport dlr_check(const ModelSpec& model, const std::vector<VertexId>& inner,
                    const std::vector<VertexId>& mid,
                    const DlrOptions& options, RngStream rng);

}  // namespace qrotor
