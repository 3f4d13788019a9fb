#include "qrotor/torus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qrotor {

double wrap01(double x) {
  double r = x - std::floor(x);
  // x slightly below an integer can round up to exactly 1.
  if (r >= 1.0) r = 0.0;
  return r;
}

double wrap_centered(double x) {
  double r = x - std::floor(x + 0.5);
  if (r >= 0.5) r -= 1.0;
  return r;
}

TorusPoint::TorusPoint(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim)
    throw std::invalid_argument("torus point: dimension must be in [1, " +
                                std::to_string(kMaxDim) + "]");
}

TorusPoint::TorusPoint(std::initializer_list<double> coords)
    : TorusPoint(std::span<const double>(coords.begin(), coords.size())) {}

TorusPoint::TorusPoint(std::span<const double> coords)
    : TorusPoint(static_cast<int>(coords.size())) {
  for (int i = 0; i < dim_; ++i) x_[i] = wrap01(coords[i]);
}

bool TorusPoint::operator==(const TorusPoint& other) const {
  if (dim_ != other.dim_) return false;
  for (int i = 0; i < dim_; ++i)
    if (x_[i] != other.x_[i]) return false;
  return true;
}

int matrix_rank(const std::vector<std::vector<GroupElement::Rational>>& matrix) {
  auto m = matrix;
  const int rows = static_cast<int>(m.size());
  const int cols = rows ? static_cast<int>(m[0].size()) : 0;
  int rank = 0;
  for (int c = 0; c < cols && rank < rows; ++c) {
    int pivot = -1;
    for (int r = rank; r < rows; ++r)
      if (m[r][c].numerator() != 0) {  // rational-vs-int comparison recurses under C++20 in Boost 1.74
        pivot = r;
        break;
      }
    if (pivot < 0) continue;
    std::swap(m[rank], m[pivot]);
    for (int r = rank + 1; r < rows; ++r) {
      if (m[r][c].numerator() == 0) continue;
      const auto factor = m[r][c] / m[rank][c];
      for (int k = c; k < cols; ++k) m[r][k] -= factor * m[rank][k];
    }
    ++rank;
  }
  return rank;
}

GroupElement::GroupElement(std::vector<double> theta, std::vector<std::vector<Rational>> matrix)
    : theta_(std::move(theta)), matrix_(std::move(matrix)) {
  if (theta_.empty()) throw std::invalid_argument("group element: empty theta");
  if (matrix_.size() != theta_.size())
    throw std::invalid_argument("group element: A must have one row per theta component");
  dim_ = static_cast<int>(matrix_[0].size());
  if (dim_ < 1 || dim_ > kMaxDim) throw std::invalid_argument("group element: bad torus dimension");
  for (const auto& row : matrix_)
    if (static_cast<int>(row.size()) != dim_)
      throw std::invalid_argument("group element: ragged matrix A");
  if (matrix_rank(matrix_) != group_dim())
    throw std::invalid_argument("group element: A must have rank equal to the group dimension");
  for (int k = 0; k < dim_; ++k) {
    double s = 0.0;
    for (int i = 0; i < group_dim(); ++i) s += theta_[i] * boost::rational_cast<double>(matrix_[i][k]);
    raw_shift_[k] = s;
    shift_[k] = wrap01(s);
  }
}

GroupElement GroupElement::translation(std::vector<double> theta) {
  const auto d = theta.size();
  std::vector<std::vector<Rational>> a(d, std::vector<Rational>(d, Rational(0)));
  for (std::size_t i = 0; i < d; ++i) a[i][i] = Rational(1);
  return GroupElement(std::move(theta), std::move(a));
}

GroupElement GroupElement::identity(int dim) {
  return translation(std::vector<double>(static_cast<std::size_t>(dim), 0.0));
}

double GroupElement::norm() const {
  double s = 0.0;
  for (int k = 0; k < dim_; ++k) s += raw_shift_[k] * raw_shift_[k];
  return std::sqrt(s);
}

GroupElement GroupElement::inverse() const { return scaled(-1.0); }

GroupElement GroupElement::scaled(double c) const {
  std::vector<double> t = theta_;
  for (double& v : t) v *= c;
  return GroupElement(std::move(t), matrix_);
}

TorusPoint translate(const TorusPoint& x, std::span<const double> shift) {
  if (static_cast<int>(shift.size()) < x.dim())
    throw std::invalid_argument("translate: dimension mismatch");
  Vec out{};
  for (int i = 0; i < x.dim(); ++i) out[i] = x[i] + shift[i];
  return TorusPoint(std::span<const double>(out.data(), static_cast<std::size_t>(x.dim())));
}

TorusPoint act(const GroupElement& g, const TorusPoint& x) {
  if (g.dim() != x.dim()) throw std::invalid_argument("act: dimension mismatch");
  return translate(x, g.shift());
}

TorusPoint act_inv(const GroupElement& g, const TorusPoint& x) {
  if (g.dim() != x.dim()) throw std::invalid_argument("act_inv: dimension mismatch");
  Vec neg{};
  for (int i = 0; i < g.dim(); ++i) neg[i] = -g.shift()[i];
  return translate(x, neg);
}

double circle_distance(double x, double y) {
  const double d = std::fabs(wrap_centered(x - y));
  return std::min(d, 1.0 - d);
}

double torus_distance(const TorusPoint& x, const TorusPoint& y) {
  if (x.dim() != y.dim()) throw std::invalid_argument("torus_distance: dimension mismatch");
  double best = 0.0;
  for (int i = 0; i < x.dim(); ++i) best = std::max(best, circle_distance(x[i], y[i]));
  return best;
}

int default_truncation(double beta, double tolerance) {
  if (!(beta > 0.0)) throw std::invalid_argument("heat kernel: beta must be positive");
  if (!(tolerance > 0.0 && tolerance < 1.0))
    throw std::invalid_argument("heat kernel: tolerance must lie in (0, 1)");
  return static_cast<int>(std::ceil(1.0 + std::sqrt(2.0 * beta * std::log(1.0 / tolerance))));
}

HeatKernelParams HeatKernelParams::for_beta(double beta, double tolerance) {
  return HeatKernelParams{beta, default_truncation(beta, tolerance), tolerance};
}

double HeatKernelParams::tail_bound() const {
  const double m = std::max(0, trunc - 1);
  return std::exp(-m * m / (2.0 * beta));
}

void HeatKernelParams::validate() const {
  if (!(beta > 0.0)) throw std::invalid_argument("heat kernel: beta must be positive");
  if (trunc < 0) throw std::invalid_argument("heat kernel: negative truncation");
  if (tail_bound() > tolerance)
    throw std::invalid_argument("heat kernel: truncation N=" + std::to_string(trunc) +
                                " leaves tail " + std::to_string(tail_bound()) +
                                " above tolerance; increase N to at least " +
                                std::to_string(default_truncation(beta, tolerance)));
}

double heat_kernel_1d(double delta, const HeatKernelParams& p) {
  const double r = wrap_centered(delta);
  const double inv = 1.0 / (2.0 * p.beta);
  double sum = 0.0;
  for (int n = -p.trunc; n <= p.trunc; ++n) {
    const double u = r + n;
    sum += std::exp(-u * u * inv);
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * p.beta);
}

double heat_kernel_1d_derivative(double delta, const HeatKernelParams& p) {
  const double r = wrap_centered(delta);
  const double inv = 1.0 / (2.0 * p.beta);
  double sum = 0.0;
  for (int n = -p.trunc; n <= p.trunc; ++n) {
    const double u = r + n;
    sum += -u / p.beta * std::exp(-u * u * inv);
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * p.beta);
}

double heat_kernel(const TorusPoint& x, const TorusPoint& y, const HeatKernelParams& p) {
  if (x.dim() != y.dim()) throw std::invalid_argument("heat_kernel: dimension mismatch");
  p.validate();
  double prod = 1.0;
  for (int i = 0; i < x.dim(); ++i) prod *= heat_kernel_1d(x[i] - y[i], p);
  return prod;
}

Vec heat_kernel_grad(const TorusPoint& x, const TorusPoint& y, const HeatKernelParams& p) {
  if (x.dim() != y.dim()) throw std::invalid_argument("heat_kernel_grad: dimension mismatch");
  p.validate();
  const int d = x.dim();
  Vec value{}, deriv{};
  for (int i = 0; i < d; ++i) {
    value[i] = heat_kernel_1d(x[i] - y[i], p);
    deriv[i] = heat_kernel_1d_derivative(x[i] - y[i], p);
  }
  Vec grad{};
  for (int i = 0; i < d; ++i) {
    double g = deriv[i];
    for (int k = 0; k < d; ++k)
      if (k != i) g *= value[k];
    grad[i] = g;
  }
  return grad;
}

double heat_kernel_sup(double beta, int dim) {
  const auto p = HeatKernelParams::for_beta(beta);
  const double peak = heat_kernel_1d(0.0, p);
  double slope = 0.0;
  constexpr int kScan = 4096;
  for (int i = 0; i < kScan; ++i)
    slope = std::max(slope, std::fabs(heat_kernel_1d_derivative(-0.5 + double(i) / kScan, p)));
  const double peak_d = std::pow(peak, dim);
  const double grad_d = std::sqrt(double(dim)) * slope * std::pow(peak, dim - 1);
  return std::max(peak_d, grad_d);
}

}  // namespace qrotor
