#pragma once

// Reduced density matrix kernels F(x^0, y^0) over a window Lambda^0, their
// shift invariance, and dense kernel matrices for trace-norm comparisons.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrotor/gibbs.hpp"

namespace qrotor {

/// One kernel argument pair: x[k], y[k] belong to the k-th window vertex.
struct KernelPair {
  std::vector<TorusPoint> x;
  std::vector<TorusPoint> y;
};

enum class RdmMethod { reference, chain };

RdmMethod parse_rdm_method(std::string_view name);
std::string to_string(RdmMethod m);

struct RdmOptions {
  RdmMethod method = RdmMethod::reference;
  std::uint64_t samples = 100000;  // reference: independent draws; chain: recorded sweeps
  int batches = 50;
  // chain method only
  int inner_bridges = 16;
  int inner_loops = 64;
  std::uint64_t thin = 1;
  std::int64_t burn_in = -1;
  ChainOptions chain;
};

struct RdmkEstimate {
  std::vector<VertexId> sites;
  int dim = 1;
  std::vector<KernelPair> pairs;
  std::vector<double> mean;
  std::vector<double> stderr_;
  std::vector<bool> zero_flag;  // every numerator sample vanished (hard core)
  std::uint64_t samples = 0;
  int slices = 0;
  double beta = 0.0;
  RdmMethod method = RdmMethod::reference;
};

/// reference: F = prod p(x, y) / Z0^|Lambda^0| * E[e^{-h(bridges v loops)}] / E[e^{-h(loops)}]
/// with all loops from the free measure and common random numbers.
/// chain: the window's complement is sampled by a Gibbs chain; per state the
/// bridge average is divided by the free-loop average over the window.
RdmkEstimate estimate_rdmk(const ModelSpec& model, const std::vector<VertexId>& sites,
                           const std::vector<KernelPair>& pairs, const RdmOptions& options, RngStream rng);

/// Closed form for V = 0: prod_k p(x_k, y_k) / p(0, 0).
double free_kernel(const KernelPair& pair, double beta);

struct InvarianceReport {
  RdmkEstimate base;
  RdmkEstimate shifted;     // pairs (g x, g y)
  std::vector<double> diff;  // F(x, y) - F(gx, gy)
  std::vector<double> diff_err;
  double max_abs_diff = 0.0;
  double max_diff_err = 0.0;
  bool coupled = true;
  /// The estimator is exactly shift covariant (reference method, free
  /// boundary or V = 0, smooth V): differences must vanish up to rounding.
  bool exact_claim = false;
};

/// Estimates both pair sets with coupled randomness (shifted bridges and,
/// for the reference method, shifted free loops).
InvarianceReport check_invariance(const ModelSpec& model, const std::vector<VertexId>& sites,
                                  const std::vector<KernelPair>& pairs, const GroupElement& g,
                                  const RdmOptions& options, RngStream rng);

// Kernel matrices on the midpoint grid z_a = (a + 1/2)/m, one window vertex
// per index digit and one digit per torus coordinate.

struct KernelMatrix {
  int m = 0;
  int dim = 1;
  int sites = 1;
  double weight = 1.0;  // m^{-sites*dim}
  Eigen::MatrixXd values;
};

/// Point of the midpoint grid with flat index `idx`.
std::vector<TorusPoint> grid_point(std::size_t idx, int m, int sites, int dim);
/// All (x, y) pairs of the grid, row-major in (x index, y index).
std::vector<KernelPair> grid_pairs(int m, int sites = 1, int dim = 1);
/// Diagonal pairs (x, x) of the grid.
std::vector<KernelPair> diagonal_pairs(int m, int sites = 1, int dim = 1);

KernelMatrix kernel_matrix(const RdmkEstimate& est, int m);
/// V = 0 single-site kernel with winding truncation N, d = 1.
KernelMatrix free_kernel_matrix(double beta, int m, int trunc);
/// Rescale so that weight * trace = 1.
KernelMatrix normalized(KernelMatrix k);
double grid_trace(const KernelMatrix& k);

/// Sum of singular values of weight * (A - B).
double trace_norm_distance(const KernelMatrix& a, const KernelMatrix& b);
double trace_norm(const Eigen::MatrixXd& a);

struct PsdReport {
  double min_eigenvalue = 0.0;
  bool psd = false;
};
PsdReport psd_check(const KernelMatrix& k, double tolerance = 1e-10);

/// Trace-norm distances from the truncation-N free kernels (N = 0..n_max),
/// each normalised to unit trace, to the fully converged one.
std::vector<double> lemma11_sweep(double beta, int m, int n_max);

/// Pairs over sites + {traced}: every base pair extended by (z_c, z_c).
std::vector<KernelPair> extend_pairs_for_trace(const std::vector<KernelPair>& base, int m, int dim = 1);
/// Grid partial trace of an estimate made on extended pairs. The error is the
/// mean of the per-point errors, an upper bound for correlated estimates.
void partial_trace(const RdmkEstimate& extended, std::size_t base_count, int m, std::vector<double>& mean,
                   std::vector<double>& err);

void write_rdmk_csv(std::ostream& out, const RdmkEstimate& est);
/// "QRKM" | u32 version | i32 m | i32 d | i32 sites | f64 weight | n*n f64 row-major.
void write_kernel_binary(const std::string& path, const KernelMatrix& k);
KernelMatrix read_kernel_binary(const std::string& path);

}  // namespace qrotor
