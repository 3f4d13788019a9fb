#pragma once

// Monte Carlo error analysis and goodness-of-fit helpers.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qrotor {

struct MeanError {
  double mean = 0.0;
  double stderr_ = 0.0;
  double tau = 0.5;  // integrated autocorrelation time (0.5 for independent data)
  double ess = 0.0;
  std::size_t n = 0;
};

/// Integrated autocorrelation time with Sokal's automatic window (c = 6).
double integrated_autocorr(std::span<const double> xs, double window_c = 6.0);

/// Mean with a non-overlapping batch-means standard error.
MeanError batch_mean(std::span<const double> xs, int batches = 50);

/// Ratio of totals sum(a)/sum(b) with a batch-means delta-method error.
MeanError batch_ratio(std::span<const double> a, std::span<const double> b, int batches = 50);

/// Upper-tail chi-square p-value for counts against expected counts.
double chi2_pvalue(std::span<const double> observed, std::span<const double> expected);

/// sup |F_n - F| for a continuous reference CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
/// Asymptotic two-sided critical value of the KS statistic.
double ks_critical(std::size_t n, double alpha);

struct BinnedEstimate {
  std::vector<double> p;    // bin probabilities
  std::vector<double> err;  // batch-means standard errors
  std::size_t n = 0;
};

/// Histogram of a time series of bin indices with per-bin batch errors.
BinnedEstimate binned_marginal(std::span<const int> bins, int nbins, int batches = 50);

double tv_distance(std::span<const double> p, std::span<const double> q);

/// Mean and standard deviation of the TV statistic when both histograms
/// estimate the same distribution with independent Gaussian bin errors.
struct TvNull {
  double mean = 0.0;
  double sd = 0.0;
};
TvNull tv_null(std::span<const double> err_a, std::span<const double> err_b);

}  // namespace qrotor
