#include "landloc/projector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace landloc::projector {

double laguerre(int n, double x) noexcept {
  if (n <= 0) return 1.0;
  double l0 = 1.0, l1 = 1.0 - x;
  for (int k = 1; k < n; ++k) {
    const double l2 = ((2.0 * k + 1.0 - x) * l1 - k * l0) / (k + 1.0);
    l0 = l1;
    l1 = l2;
  }
  return l1;
}

double ProjectorKernel::diagonal() const noexcept { return B / (2.0 * std::numbers::pi); }

double ProjectorKernel::modulus(double r) const noexcept {
  const double s = B * r * r;
  return diagonal() * std::abs(laguerre(n, 0.5 * s)) * std::exp(-0.25 * s);
}

cplx ProjectorKernel::operator()(Vec2 x, Vec2 y) const noexcept {
  const Vec2 d = x - y;
  const double s = B * dot(d, d);
  const double amp = diagonal() * laguerre(n, 0.5 * s) * std::exp(-0.25 * s);
  return std::polar(amp, -0.5 * B * wedge(x, y));
}

cplx kernel_eval(const ProjectorKernel& kernel, Vec2 x, Vec2 y) { return kernel(x, y); }

std::vector<std::pair<Vec2, double>> quadrature_points(const BoxCutoff& chi, double h) {
  std::vector<std::pair<Vec2, double>> pts;
  if (chi.empty()) return pts;
  if (!(h > 0.0)) throw std::invalid_argument("quadrature_points: spacing must be positive");
  const double lx = chi.hi.x - chi.lo.x, ly = chi.hi.y - chi.lo.y;
  const auto nx = static_cast<std::size_t>(std::ceil(lx / h - 1e-12));
  const auto ny = static_cast<std::size_t>(std::ceil(ly / h - 1e-12));
  const double hx = lx / static_cast<double>(nx), hy = ly / static_cast<double>(ny);
  pts.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      pts.emplace_back(Vec2{chi.lo.x + (static_cast<double>(i) + 0.5) * hx,
                            chi.lo.y + (static_cast<double>(j) + 0.5) * hy},
                       hx * hy);
  return pts;
}

namespace {

double hs_squared(const ProjectorKernel& k, const LocalizationPair& pair, double h) {
  const auto p1 = quadrature_points(pair.chi1, h);
  const auto p2 = quadrature_points(pair.chi2, h);
  std::vector<double> w2(p2.size());
  for (std::size_t j = 0; j < p2.size(); ++j) {
    const double c = pair.chi2(p2[j].first);
    w2[j] = p2[j].second * c * c;
  }
  double total = 0.0;
  for (const auto& [x, ax] : p1) {
    const double c = pair.chi1(x);
    if (c == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < p2.size(); ++j) {
      if (w2[j] == 0.0) continue;
      const double m = k.modulus(norm(x - p2[j].first));
      row += w2[j] * m * m;
    }
    total += ax * c * c * row;
  }
  return total;
}

double trace_norm_at(const ProjectorKernel& k, const BoxCutoff& chi, double h) {
  const auto pts = quadrature_points(chi, h);
  const auto n = static_cast<Eigen::Index>(pts.size());
  if (n == 0) return 0.0;
  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = std::sqrt(pts[static_cast<std::size_t>(i)].second) * chi(pts[static_cast<std::size_t>(i)].first);
  Eigen::MatrixXcd K(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      K(i, j) = s(i) * s(j) * k(pts[static_cast<std::size_t>(i)].first, pts[static_cast<std::size_t>(j)].first);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(K, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

}  // namespace

NormEstimate hs_norm_localized(const ProjectorKernel& kernel, const LocalizationPair& pair,
                               double spacing) {
  const double lb = kernel.magnetic_length();
  NormEstimate out;
  out.spacing = spacing > 0.0 ? spacing : 0.25 * lb;
  out.reliable = out.spacing <= 0.25 * lb * (1.0 + 1e-12);
  if (pair.chi1.empty() || pair.chi2.empty()) return out;
  const double coarse = std::sqrt(hs_squared(kernel, pair, out.spacing));
  const double fine = std::sqrt(hs_squared(kernel, pair, 0.5 * out.spacing));
  out.value = fine;
  out.error_estimate = std::abs(coarse - fine) / 3.0;
  return out;
}

NormEstimate trace_norm_localized(const ProjectorKernel& kernel, const BoxCutoff& chi, double spacing) {
  const double lb = kernel.magnetic_length();
  NormEstimate out;
  out.spacing = spacing > 0.0 ? spacing : 0.25 * lb;
  out.reliable = out.spacing <= 0.25 * lb * (1.0 + 1e-12);
  if (chi.empty()) return out;
  // Step doubling rather than halving: the fine matrix would be 4x larger.
  const double fine = trace_norm_at(kernel, chi, out.spacing);
  const double coarse = trace_norm_at(kernel, chi, 2.0 * out.spacing);
  out.value = fine;
  out.error_estimate = std::abs(coarse - fine) / 3.0;
  return out;
}

Eigen::VectorXcd translation_phases(const Grid& grid, Vec2 a, double B) {
  const Grid moved = grid.shifted(a);
  Eigen::VectorXcd d(static_cast<Eigen::Index>(moved.size()));
  for (std::size_t k = 0; k < moved.size(); ++k)
    d(static_cast<Eigen::Index>(k)) = std::polar(1.0, -0.5 * B * wedge(moved.point(k), a));
  return d;
}

std::pair<Grid, Eigen::VectorXcd> magnetic_translate(const Grid& grid, const Eigen::VectorXcd& psi,
                                                     Vec2 a, double B) {
  if (psi.size() != static_cast<Eigen::Index>(grid.size()))
    throw std::invalid_argument("magnetic_translate: vector does not match grid");
  // Index k of the moved grid sits at x = x_k + a, so psi(x - a) = psi[k].
  Eigen::VectorXcd out = translation_phases(grid, a, B).cwiseProduct(psi);
  return {grid.shifted(a), std::move(out)};
}

namespace {

// (p - A)^2 f = -Lap f + 2i A.grad f + |A|^2 f for A = (B/2)(x2, -x1).
template <class F>
cplx apply_landau(F&& f, Vec2 x, double B, double s) {
  const auto d1 = [&](Vec2 e) {
    return (-f(x + 2.0 * s * e) + 8.0 * f(x + s * e) - 8.0 * f(x - s * e) + f(x - 2.0 * s * e)) / (12.0 * s);
  };
  const auto d2 = [&](Vec2 e) {
    return (-f(x + 2.0 * s * e) + 16.0 * f(x + s * e) - 30.0 * f(x) + 16.0 * f(x - s * e) - f(x - 2.0 * s * e)) /
           (12.0 * s * s);
  };
  const Vec2 ex{1.0, 0.0}, ey{0.0, 1.0};
  const double a1 = 0.5 * B * x.y, a2 = -0.5 * B * x.x;
  const cplx I{0.0, 1.0};
  return -(d2(ex) + d2(ey)) + 2.0 * I * (a1 * d1(ex) + a2 * d1(ey)) + (a1 * a1 + a2 * a2) * f(x);
}

}  // namespace

IdentityReport projector_identities_check(const ProjectorKernel& kernel, Vec2 center,
                                          double box_half_side, double spacing) {
  if (!(box_half_side > 0.0) || !(spacing > 0.0))
    throw std::invalid_argument("projector_identities_check: box and spacing must be positive");
  const double lb = kernel.magnetic_length();
  const double scale = kernel.diagonal();
  IdentityReport rep;
  rep.n = kernel.n;
  rep.B = kernel.B;
  rep.box_half_side = box_half_side;
  rep.spacing = spacing;

  std::vector<Vec2> probes;
  for (Vec2 o : {Vec2{0.0, 0.0}, Vec2{0.7, -0.3}, Vec2{-0.5, 0.8}, Vec2{0.4, 0.55}})
    probes.push_back(center + lb * o);
  rep.probes = probes.size();

  const double L = box_half_side * lb;
  const BoxCutoff box{center - Vec2{L, L}, center + Vec2{L, L}, 0.0};
  const auto zs = quadrature_points(box, spacing * lb);

  for (const Vec2 x : probes) {
    rep.diagonal = std::max(rep.diagonal, std::abs(kernel(x, x) - scale) / scale);
    for (const Vec2 y : probes) {
      rep.hermiticity = std::max(rep.hermiticity, std::abs(kernel(x, y) - std::conj(kernel(y, x))) / scale);
      cplx acc = 0.0;
      for (const auto& [z, w] : zs) acc += w * kernel(x, z) * kernel(z, y);
      rep.idempotency = std::max(rep.idempotency, std::abs(acc - kernel(x, y)) / scale);
    }
    // Columns P(., y) as functions of their first argument.
    const auto col = [&](Vec2 z) { return kernel(z, x); };
    for (const Vec2 at : probes) {
      const cplx hf = apply_landau(col, at, kernel.B, 0.02 * lb);
      rep.eigenrelation = std::max(rep.eigenrelation,
                                   std::abs(hf - kernel.landau_energy() * col(at)) / (kernel.landau_energy() * scale));
    }
  }
  return rep;
}

}  // namespace landloc::projector
