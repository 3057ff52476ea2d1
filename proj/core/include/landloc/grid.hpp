#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include "landloc/geometry.hpp"

namespace landloc {

/// Interior sites of a Dirichlet grid on the square of side `side` centered
/// at `center`: x = center + h (i, j) with |i|, |j| <= n - 1, n = side/(2h).
/// The walls |i| = n or |j| = n carry psi = 0 and are not stored.
class Grid {
 public:
  Grid(Vec2 center, double side, double h) : center_(center), side_(side), h_(h) {
    if (!(h > 0.0) || !(side > 0.0)) throw std::invalid_argument("Grid: side and h must be positive");
    const double n = side / (2.0 * h);
    n_ = static_cast<std::int64_t>(std::llround(n));
    if (std::abs(n - static_cast<double>(n_)) > 1e-9 * n || n_ < 1)
      throw std::invalid_argument("Grid: side/(2h) must be a positive integer");
  }

  Vec2 center() const noexcept { return center_; }
  double side() const noexcept { return side_; }
  double h() const noexcept { return h_; }
  std::int64_t n() const noexcept { return n_; }
  std::int64_t per_axis() const noexcept { return 2 * n_ - 1; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(per_axis() * per_axis()); }
  double area() const noexcept { return side_ * side_; }
  double flux(double B) const noexcept { return B * h_ * h_; }

  bool inside(std::int64_t i, std::int64_t j) const noexcept {
    return i > -n_ && i < n_ && j > -n_ && j < n_;
  }
  std::size_t index(std::int64_t i, std::int64_t j) const noexcept {
    return static_cast<std::size_t>((j + n_ - 1) * per_axis() + (i + n_ - 1));
  }
  std::int64_t i_of(std::size_t k) const noexcept {
    return static_cast<std::int64_t>(k) % per_axis() - n_ + 1;
  }
  std::int64_t j_of(std::size_t k) const noexcept {
    return static_cast<std::int64_t>(k) / per_axis() - n_ + 1;
  }
  Vec2 point(std::int64_t i, std::int64_t j) const noexcept {
    return center_ + Vec2{h_ * static_cast<double>(i), h_ * static_cast<double>(j)};
  }
  Vec2 point(std::size_t k) const noexcept { return point(i_of(k), j_of(k)); }

  /// Same grid moved by a; a must be a multiple of h in each coordinate.
  Grid shifted(Vec2 a) const {
    for (double c : {a.x, a.y})
      if (std::abs(c / h_ - std::round(c / h_)) > 1e-9)
        throw std::invalid_argument("Grid::shifted: translation is off the grid lattice");
    return Grid(center_ + a, side_, h_);
  }
  bool same_shape(const Grid& o) const noexcept { return n_ == o.n_ && h_ == o.h_; }

 private:
  Vec2 center_;
  double side_;
  double h_;
  std::int64_t n_ = 0;
};

}  // namespace landloc
