#pragma once

#include <algorithm>
#include <cmath>

#include "landloc/geometry.hpp"

namespace landloc {

/// Cutoff supported on the closed box [lo, hi]: 1 deeper than `edge` inside,
/// rising as a C^2 smoothstep across the boundary layer, exactly 0 outside.
/// edge = 0 gives the indicator. An inverted box (hi < lo) is the zero cutoff.
struct BoxCutoff {
  Vec2 lo;
  Vec2 hi;
  double edge = 0.0;

  static BoxCutoff square(Vec2 center, double side, double edge = 0.0) {
    return {center - Vec2{0.5 * side, 0.5 * side}, center + Vec2{0.5 * side, 0.5 * side}, edge};
  }
  static BoxCutoff zero() { return {{0.0, 0.0}, {-1.0, -1.0}, 0.0}; }

  bool empty() const noexcept { return !(hi.x > lo.x && hi.y > lo.y); }
  double area() const noexcept { return empty() ? 0.0 : (hi.x - lo.x) * (hi.y - lo.y); }
  bool in_support(Vec2 x) const noexcept {
    return !empty() && x.x >= lo.x && x.x <= hi.x && x.y >= lo.y && x.y <= hi.y;
  }

  double operator()(Vec2 x) const noexcept {
    if (!in_support(x)) return 0.0;
    if (edge <= 0.0) return 1.0;
    return ramp(std::min(x.x - lo.x, hi.x - x.x)) * ramp(std::min(x.y - lo.y, hi.y - x.y));
  }

  /// Distance between the supports of two cutoffs.
  friend double support_distance(const BoxCutoff& a, const BoxCutoff& b) noexcept {
    const double dx = std::max({0.0, b.lo.x - a.hi.x, a.lo.x - b.hi.x});
    const double dy = std::max({0.0, b.lo.y - a.hi.y, a.lo.y - b.hi.y});
    return std::hypot(dx, dy);
  }

 private:
  double ramp(double d) const noexcept {
    const double t = std::clamp(d / edge, 0.0, 1.0);
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  }
};

}  // namespace landloc
