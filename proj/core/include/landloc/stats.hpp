#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace landloc {

/// Two-sided z value for a 95% interval.
inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double low = 0.0;
  double high = 0.0;
  bool contains(double x) const noexcept { return low <= x && x <= high; }
};

/// Proportion estimate with its Wilson score interval.
struct Proportion {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double estimate = 0.0;
  Interval ci;
  /// Binomial standard error sqrt(p(1-p)/n) at the point estimate.
  double standard_error() const noexcept;
};

Interval wilson_interval(std::size_t successes, std::size_t trials, double z = kZ95);
Proportion make_proportion(std::size_t successes, std::size_t trials, double z = kZ95);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;
  double max_abs_residual() const noexcept;
};

/// Ordinary least squares y = slope * x + intercept. Requires >= 2 points with
/// distinct x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Percentile bootstrap interval for the OLS slope, resampling (x, y) pairs.
Interval bootstrap_slope(std::span<const double> x, std::span<const double> y,
                         std::size_t resamples, std::uint64_t seed, double level = 0.95);

/// Percentile bootstrap interval for the mean of `samples`.
Interval bootstrap_mean(std::span<const double> samples, std::size_t resamples,
                        std::uint64_t seed, double level = 0.95);

double mean(std::span<const double> v);
/// Unbiased sample variance; zero for fewer than two samples.
double variance(std::span<const double> v);
/// Pearson correlation coefficient.
double correlation(std::span<const double> x, std::span<const double> y);

}  // namespace landloc
