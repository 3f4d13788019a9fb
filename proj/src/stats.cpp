#include "qrotor/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace qrotor {

double integrated_autocorr(std::span<const double> xs, double window_c) {
  const std::size_t n = xs.size();
  if (n < 4) return 0.5;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= double(n);
  double c0 = 0.0;
  for (double x : xs) c0 += (x - mean) * (x - mean);
  c0 /= double(n);
  if (c0 <= 0.0) return 0.5;
  double tau = 0.5;
  const std::size_t max_lag = n / 2;
  for (std::size_t t = 1; t < max_lag; ++t) {
    double c = 0.0;
    for (std::size_t k = 0; k + t < n; ++k) c += (xs[k] - mean) * (xs[k + t] - mean);
    c /= double(n - t);
    tau += c / c0;
    if (double(t) >= window_c * tau) break;
  }
  return std::max(tau, 0.5);
}

MeanError batch_mean(std::span<const double> xs, int batches) {
  MeanError r;
  r.n = xs.size();
  if (xs.empty()) return r;
  double s = 0.0;
  for (double x : xs) s += x;
  r.mean = s / double(xs.size());
  const std::size_t b = std::min<std::size_t>(std::size_t(std::max(batches, 2)), xs.size());
  const std::size_t len = xs.size() / b;
  if (b < 2 || len == 0) return r;
  std::vector<double> means(b);
  for (std::size_t k = 0; k < b; ++k) {
    double t = 0.0;
    for (std::size_t i = 0; i < len; ++i) t += xs[k * len + i];
    means[k] = t / double(len);
  }
  double mm = 0.0;
  for (double m : means) mm += m;
  mm /= double(b);
  double var = 0.0;
  for (double m : means) var += (m - mm) * (m - mm);
  var /= double(b - 1);
  r.stderr_ = std::sqrt(var / double(b));
  double naive = 0.0;
  for (double x : xs) naive += (x - r.mean) * (x - r.mean);
  naive /= double(xs.size());
  if (naive > 0.0 && r.stderr_ > 0.0) {
    r.tau = 0.5 * r.stderr_ * r.stderr_ * double(xs.size()) / naive;
    r.ess = naive / (r.stderr_ * r.stderr_);
  } else {
    r.ess = double(xs.size());
  }
  return r;
}

MeanError batch_ratio(std::span<const double> a, std::span<const double> b, int batches) {
  if (a.size() != b.size()) throw std::invalid_argument("batch_ratio: length mismatch");
  MeanError r;
  r.n = a.size();
  double sa = 0.0, sb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sa += a[k];
    sb += b[k];
  }
  if (sb == 0.0) throw std::domain_error("batch_ratio: zero denominator");
  r.mean = sa / sb;
  const std::size_t nb = std::min<std::size_t>(std::size_t(std::max(batches, 2)), a.size());
  const std::size_t len = a.size() / nb;
  if (nb < 2 || len == 0) return r;
  // Linearised residuals a - R b per batch.
  const double mb = sb / double(a.size());
  std::vector<double> res(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    double t = 0.0;
    for (std::size_t i = 0; i < len; ++i) t += a[k * len + i] - r.mean * b[k * len + i];
    res[k] = t / double(len) / mb;
  }
  double m = 0.0;
  for (double v : res) m += v;
  m /= double(nb);
  double var = 0.0;
  for (double v : res) var += (v - m) * (v - m);
  var /= double(nb - 1);
  r.stderr_ = std::sqrt(var / double(nb));
  r.ess = double(a.size());
  return r;
}

double chi2_pvalue(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size() || observed.size() < 2)
    throw std::invalid_argument("chi2: need matching bins");
  double stat = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    if (!(expected[k] > 0.0)) throw std::invalid_argument("chi2: expected counts must be positive");
    const double d = observed[k] - expected[k];
    stat += d * d / expected[k];
  }
  boost::math::chi_squared dist(double(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = double(samples.size());
  double d = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double f = cdf(samples[k]);
    d = std::max({d, f - double(k) / n, double(k + 1) / n - f});
  }
  return d;
}

double ks_critical(std::size_t n, double alpha) {
  // Kolmogorov limit law; Boost 1.74 ships no Kolmogorov distribution.
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(double(n));
}

BinnedEstimate binned_marginal(std::span<const int> bins, int nbins, int batches) {
  BinnedEstimate r;
  r.n = bins.size();
  r.p.assign(std::size_t(nbins), 0.0);
  r.err.assign(std::size_t(nbins), 0.0);
  std::vector<double> ind(bins.size());
  for (int b = 0; b < nbins; ++b) {
    for (std::size_t k = 0; k < bins.size(); ++k) ind[k] = bins[k] == b ? 1.0 : 0.0;
    const auto m = batch_mean(ind, batches);
    r.p[b] = m.mean;
    r.err[b] = m.stderr_;
  }
  return r;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv: bin mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::fabs(p[k] - q[k]);
  return 0.5 * s;
}

TvNull tv_null(std::span<const double> err_a, std::span<const double> err_b) {
  if (err_a.size() != err_b.size()) throw std::invalid_argument("tv_null: bin mismatch");
  TvNull r;
  double var = 0.0;
  for (std::size_t k = 0; k < err_a.size(); ++k) {
    const double s2 = err_a[k] * err_a[k] + err_b[k] * err_b[k];
    r.mean += 0.5 * std::sqrt(2.0 * s2 / std::numbers::pi);
    var += 0.25 * s2 * (1.0 - 2.0 / std::numbers::pi);
  }
  r.sd = std::sqrt(var);
  return r;
}

}  // namespace qrotor
