#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "landloc/grid.hpp"
#include "landloc/potential.hpp"
#include "landloc/rng.hpp"
#include "landloc/stats.hpp"

namespace landloc::experiments::detail {

/// Stream index for trial t of parameter point k; trials per point < 2^32.
inline std::uint64_t key(std::uint64_t k, std::uint64_t t) { return (k << 32) | t; }

/// Percentile interval of stat(indices) over bootstrap resamples of
/// n units. Non-finite resample statistics are dropped.
template <class Stat>
Interval bootstrap(std::size_t n, std::size_t resamples, std::uint64_t seed, Stat&& stat,
                   double level = 0.95) {
  Rng rng(seed);
  std::vector<double> vals;
  vals.reserve(resamples);
  std::vector<std::size_t> idx(n);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& i : idx) i = rng.below(n);
    const double v = stat(idx);
    if (std::isfinite(v)) vals.push_back(v);
  }
  if (vals.empty()) return {NAN, NAN};
  std::sort(vals.begin(), vals.end());
  const double alpha = 0.5 * (1.0 - level);
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(vals.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, vals.size() - 1);
    return vals[lo] + (pos - static_cast<double>(lo)) * (vals[hi] - vals[lo]);
  };
  return {at(alpha), at(1.0 - alpha)};
}

/// Weighted least squares y = X beta; columns of X given row-wise.
std::vector<double> weighted_lsq(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                                 const std::vector<double>& w);

/// Pearson correlation, NaN when undefined.
double safe_correlation(const std::vector<double>& x, const std::vector<double>& y);

std::string fmt(double x);

/// Coupling sites whose bumps (support radius `reach`) can touch the grid square.
inline potential::SiteBox covering_sites(const Grid& g, double reach) {
  const double half = 0.5 * g.side() + reach;
  return {{static_cast<std::int64_t>(std::floor(g.center().x - half)),
           static_cast<std::int64_t>(std::floor(g.center().y - half))},
          {static_cast<std::int64_t>(std::ceil(g.center().x + half)),
           static_cast<std::int64_t>(std::ceil(g.center().y + half))}};
}

}  // namespace landloc::experiments::detail
