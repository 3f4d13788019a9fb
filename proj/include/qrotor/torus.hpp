#pragma once

// Flat torus M = R^d / Z^d, the additive group action and the Brownian
// transition density written as an image sum over windings.

#include <array>
#include <initializer_list>
#include <span>
#include <vector>

#include <boost/rational.hpp>

namespace qrotor {

inline constexpr int kMaxDim = 4;
using Vec = std::array<double, kMaxDim>;

/// Reduce to [0, 1).
double wrap01(double x);
/// Reduce to [-1/2, 1/2).
double wrap_centered(double x);

class TorusPoint {
 public:
  explicit TorusPoint(int dim = 1);
  TorusPoint(std::initializer_list<double> coords);
  explicit TorusPoint(std::span<const double> coords);

  int dim() const { return dim_; }
  double operator[](int i) const { return x_[i]; }
  std::span<const double> coords() const { return {x_.data(), static_cast<std::size_t>(dim_)}; }

  bool operator==(const TorusPoint& other) const;

 private:
  int dim_;
  Vec x_{};
};

/// Group element theta (d' reals) acting through a rational d' x d matrix A
/// of rank d': x -> x + theta A (mod 1).
class GroupElement {
 public:
  using Rational = boost::rational<long long>;

  GroupElement(std::vector<double> theta, std::vector<std::vector<Rational>> matrix);
  /// Plain translation by `theta` (A = identity).
  static GroupElement translation(std::vector<double> theta);
  static GroupElement identity(int dim);

  int dim() const { return dim_; }
  int group_dim() const { return static_cast<int>(theta_.size()); }
  const std::vector<double>& theta() const { return theta_; }
  const std::vector<std::vector<Rational>>& matrix() const { return matrix_; }
  /// The induced shift theta A, reduced mod 1.
  const Vec& shift() const { return shift_; }
  /// Euclidean norm of the unreduced theta A.
  double norm() const;

  GroupElement inverse() const;
  /// theta -> c * theta; the gauge construction uses fractional multiples.
  GroupElement scaled(double c) const;

 private:
  std::vector<double> theta_;
  std::vector<std::vector<Rational>> matrix_;
  int dim_;
  Vec raw_shift_{};
  Vec shift_{};
};

int matrix_rank(const std::vector<std::vector<GroupElement::Rational>>& matrix);

TorusPoint act(const GroupElement& g, const TorusPoint& x);
TorusPoint act_inv(const GroupElement& g, const TorusPoint& x);
TorusPoint translate(const TorusPoint& x, std::span<const double> shift);

/// Per-coordinate rho = min(|dx|, 1 - |dx|), aggregated by max.
double torus_distance(const TorusPoint& x, const TorusPoint& y);
double circle_distance(double x, double y);

struct HeatKernelParams {
  double beta = 1.0;
  int trunc = 0;             // windings |n_i| <= trunc around the reduced displacement
  double tolerance = 1e-12;  // allowed truncation tail

  /// Smallest truncation whose tail bound is below `tolerance`.
  static HeatKernelParams for_beta(double beta, double tolerance = 1e-12);
  /// exp(-(N - 1)^2 / (2 beta)).
  double tail_bound() const;
  /// Throws if beta <= 0 or the tail exceeds the tolerance.
  void validate() const;
};

int default_truncation(double beta, double tolerance = 1e-12);

/// One-dimensional kernel at displacement `delta` (any real; reduced inside).
double heat_kernel_1d(double delta, const HeatKernelParams& p);
/// d/d(delta) of heat_kernel_1d.
double heat_kernel_1d_derivative(double delta, const HeatKernelParams& p);

/// p^beta(x, y) as a product of one-dimensional image sums.
double heat_kernel(const TorusPoint& x, const TorusPoint& y, const HeatKernelParams& p);
/// Gradient with respect to x.
Vec heat_kernel_grad(const TorusPoint& x, const TorusPoint& y, const HeatKernelParams& p);

/// sup over x, y of max(p^beta, |grad_x p^beta|).
double heat_kernel_sup(double beta, int dim);

}  // namespace qrotor
