#pragma once

// Landau-level projector kernels in the symmetric gauge A = (B/2)(x2, -x1):
//
//   P_n(x, y) = (B/2pi) L_n(B|x-y|^2/2) exp(-B|x-y|^2/4) exp(-i B (x^y)/2),
//
// x^y = x2 y1 - x1 y2, with norm functionals of localized pieces computed by
// midpoint quadrature.

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "landloc/cutoff.hpp"
#include "landloc/geometry.hpp"
#include "landloc/grid.hpp"

namespace landloc::projector {

using cplx = std::complex<double>;

/// Laguerre polynomial L_n(x) by the three-term recurrence.
double laguerre(int n, double x) noexcept;

struct ProjectorKernel {
  int n = 0;
  double B = 10.0;

  cplx operator()(Vec2 x, Vec2 y) const noexcept;
  /// |P_n(x, y)|, which depends on |x - y| only.
  double modulus(double r) const noexcept;
  double magnetic_length() const noexcept { return 1.0 / std::sqrt(B); }
  double landau_energy() const noexcept { return (2.0 * n + 1.0) * B; }
  double diagonal() const noexcept;  // B / 2pi
};

cplx kernel_eval(const ProjectorKernel& kernel, Vec2 x, Vec2 y);

struct LocalizationPair {
  BoxCutoff chi1;
  BoxCutoff chi2;
  double delta() const noexcept { return support_distance(chi1, chi2); }
};

struct NormEstimate {
  double value = 0.0;
  double error_estimate = 0.0;
  double spacing = 0.0;
  /// False when the spacing exceeds a quarter magnetic length.
  bool reliable = true;
};

/// Midpoint-rule sample points and weights covering a cutoff's support with
/// spacing at most h.
std::vector<std::pair<Vec2, double>> quadrature_points(const BoxCutoff& chi, double h);

/// ||chi1 P_n chi2||_HS by double midpoint quadrature at `spacing` and at half
/// of it; reports the finer value with the Richardson error |I_h - I_h/2|/3.
/// spacing <= 0 selects a quarter magnetic length.
NormEstimate hs_norm_localized(const ProjectorKernel& kernel, const LocalizationPair& pair,
                               double spacing = 0.0);

/// Trace norm of chi P_n chi as the sum of |eigenvalues| of the quadrature
/// matrix h^2 chi(x_i) P(x_i, x_j) chi(x_j).
NormEstimate trace_norm_localized(const ProjectorKernel& kernel, const BoxCutoff& chi,
                                  double spacing = 0.0);

/// (U_a psi)(x) = exp(-i (B/2) x^a) psi(x - a): moves psi from `grid` to
/// grid.shifted(a). The phase uses B/2 so that U_a commutes with the
/// symmetric-gauge magnetic Laplacian.
std::pair<Grid, Eigen::VectorXcd> magnetic_translate(const Grid& grid, const Eigen::VectorXcd& psi,
                                                     Vec2 a, double B);
/// Diagonal of U_a in the index-preserving basis of grid -> grid.shifted(a).
Eigen::VectorXcd translation_phases(const Grid& grid, Vec2 a, double B);

struct IdentityReport {
  int n = 0;
  double B = 0.0;
  double box_half_side = 0.0;   // quadrature box, in magnetic lengths
  double spacing = 0.0;
  double idempotency = 0.0;     // sup |int P P - P| / (B/2pi)
  double hermiticity = 0.0;     // sup |P(x,y) - conj P(y,x)| / (B/2pi)
  double eigenrelation = 0.0;   // sup |(H_A - E_n) P(., y)| / (E_n sup |P|)
  double diagonal = 0.0;        // |P(x,x) - B/2pi| / (B/2pi)
  std::size_t probes = 0;
};

/// Quadrature and finite-difference checks of P^2 = P, P = P*, H_A P = E_n P
/// and P(x, x) = B/2pi at probe points within a magnetic length of `center`.
IdentityReport projector_identities_check(const ProjectorKernel& kernel, Vec2 center = {},
                                          double box_half_side = 8.0, double spacing = 1.0 / 3.0);

}  // namespace landloc::projector
