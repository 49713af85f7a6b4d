#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace levy_ou {

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double fourth_central = 0.0;
  std::size_t count = 0;

  /// Standard error of the sample mean.
  double mean_stderr() const;
  /// Standard error of the sample variance, from the fourth central moment.
  double variance_stderr() const;
};

SampleMoments moments(std::span<const double> xs);

double normal_cdf(double x, double mean, double variance);

/// Kolmogorov-Smirnov sup distance between the empirical CDF of `xs` and `cdf`.
double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov distance.
double ks_distance_two_sample(std::vector<double> a, std::vector<double> b);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Runs body(i) for i in [0, n) on up to `threads` workers (contiguous blocks).
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace levy_ou
