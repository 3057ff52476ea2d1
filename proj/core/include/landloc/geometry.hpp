#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace landloc {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

inline double norm(Vec2 v) noexcept { return std::hypot(v.x, v.y); }
constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }

/// x ∧ y = x₂y₁ − x₁y₂, the convention used by the magnetic translations.
constexpr double wedge(Vec2 a, Vec2 b) noexcept { return a.y * b.x - a.x * b.y; }

/// Integer 2-vector; ordered lexicographically (x, then y).
struct Vec2i {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend constexpr Vec2i operator+(Vec2i a, Vec2i b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2i operator-(Vec2i a, Vec2i b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend constexpr auto operator<=>(Vec2i, Vec2i) = default;
};

constexpr Vec2 to_real(Vec2i v) noexcept {
  return {static_cast<double>(v.x), static_cast<double>(v.y)};
}

/// Distance from point p to the closed segment [a, b].
inline double segment_distance(Vec2 p, Vec2 a, Vec2 b) noexcept {
  const Vec2 d = b - a;
  const double len2 = dot(d, d);
  double t = len2 > 0.0 ? dot(p - a, d) / len2 : 0.0;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return norm(p - (a + t * d));
}

}  // namespace landloc
