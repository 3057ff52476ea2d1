#include "landloc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "landloc/rng.hpp"

namespace landloc {

double Proportion::standard_error() const noexcept {
  if (trials == 0) return 0.0;
  return std::sqrt(estimate * (1.0 - estimate) / static_cast<double>(trials));
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: zero trials");
  if (successes > trials) throw std::invalid_argument("wilson_interval: successes > trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // The exact endpoints at p = 0 or 1 are 0 and 1; avoid rounding residue there.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

Proportion make_proportion(std::size_t successes, std::size_t trials, double z) {
  Proportion p;
  p.successes = successes;
  p.trials = trials;
  p.estimate = static_cast<double>(successes) / static_cast<double>(trials);
  p.ci = wilson_interval(successes, trials, z);
  return p;
}

double LinearFit::max_abs_residual() const noexcept {
  double m = 0.0;
  for (double r : residuals) m = std::max(m, std::abs(r));
  return m;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("linear_fit: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("linear_fit: need at least two points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  f.residuals.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    f.residuals.push_back(r);
    ssr += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return f;
}

namespace {

Interval percentile_interval(std::vector<double>& stats, double level) {
  std::sort(stats.begin(), stats.end());
  const double alpha = 0.5 * (1.0 - level);
  const auto at = [&](double q) {
    const double pos = q * static_cast<double>(stats.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, stats.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * stats[lo] + w * stats[hi];
  };
  return {at(alpha), at(1.0 - alpha)};
}

}  // namespace

Interval bootstrap_slope(std::span<const double> x, std::span<const double> y,
                         std::size_t resamples, std::uint64_t seed, double level) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("bootstrap_slope: need matching samples, n >= 2");
  if (resamples == 0) throw std::invalid_argument("bootstrap_slope: zero resamples");
  Rng rng(seed);
  std::vector<double> slopes;
  slopes.reserve(resamples);
  std::vector<double> bx(x.size()), by(y.size());
  std::size_t attempts = 0;
  while (slopes.size() < resamples && attempts < 50 * resamples) {
    ++attempts;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto k = rng.below(x.size());
      bx[i] = x[k];
      by[i] = y[k];
    }
    if (std::all_of(bx.begin(), bx.end(), [&](double v) { return v == bx.front(); })) continue;
    slopes.push_back(linear_fit(bx, by).slope);
  }
  if (slopes.empty()) throw std::runtime_error("bootstrap_slope: every resample was degenerate");
  return percentile_interval(slopes, level);
}

Interval bootstrap_mean(std::span<const double> samples, std::size_t resamples,
                        std::uint64_t seed, double level) {
  if (samples.empty()) throw std::invalid_argument("bootstrap_mean: no samples");
  if (resamples == 0) throw std::invalid_argument("bootstrap_mean: zero resamples");
  Rng rng(seed);
  std::vector<double> means;
  means.reserve(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) s += samples[rng.below(samples.size())];
    means.push_back(s / static_cast<double>(samples.size()));
  }
  return percentile_interval(means, level);
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("correlation: need matching samples, n >= 2");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace landloc
