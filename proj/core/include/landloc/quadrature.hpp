#pragma once

#include <cstddef>
#include <vector>

namespace landloc {

/// n-point Gauss-Legendre rule on [-1, 1]; nodes by Newton iteration on P_n.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(std::size_t n);

  /// Composite rule over [a, b] split into `panels` equal pieces.
  template <class F>
  double integrate(F&& f, double a, double b, std::size_t panels = 1) const {
    if (b <= a) return 0.0;
    const double w = (b - a) / static_cast<double>(panels);
    double total = 0.0;
    for (std::size_t k = 0; k < panels; ++k) {
      const double c = a + (static_cast<double>(k) + 0.5) * w;
      double s = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(c + 0.5 * w * nodes[i]);
      total += 0.5 * w * s;
    }
    return total;
  }
};

}  // namespace landloc
