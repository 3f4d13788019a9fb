#pragma once

// Brute-force transfer-matrix evaluation of small one-dimensional models
// (d = 1, at most three region vertices) on a uniform torus grid.

#include <vector>

#include <Eigen/Dense>

#include "qrotor/gibbs.hpp"

namespace qrotor {

struct OracleOptions {
  int m = 64;                          // grid points x_a = a/m per site
  std::vector<VertexId> kernel_sites;  // Lambda^0 for the kernel; empty: none
  std::size_t max_states = 4096;       // m^|Lambda| ceiling
};

struct OracleResult {
  int m = 0;
  int slices = 0;
  double xi = 0.0;  // partition function
  /// Base-point density of each region vertex (region order) at x_a = a/m.
  std::vector<std::vector<double>> marginal;
  /// F(x^0, y^0) at grid points, indexed by sum_k a_k m^k over kernel_sites.
  Eigen::MatrixXd kernel;
};

/// Throws std::invalid_argument outside the supported range and
/// std::length_error when m^|Lambda| exceeds max_states.
OracleResult transfer_matrix_oracle(const ModelSpec& model, const OracleOptions& options);

/// Integral over [lo, hi) of the trigonometric interpolant of periodic samples
/// f(a/m), a = 0..m-1.
double periodic_integral(const std::vector<double>& samples, double lo, double hi);

/// Bin probabilities of a density sampled on the grid.
std::vector<double> bin_probabilities(const std::vector<double>& density, int bins);

}  // namespace qrotor
