#pragma once

// Finite-volume magnetic Schroedinger operator (p - A)^2 + V on a Dirichlet
// grid, 5-point Peierls discretization in the symmetric gauge
// A = (B/2)(x2, -x1):
//
//   (H psi)(x) = (4/h^2 + V(x)) psi(x) - h^-2 sum_e exp(-i theta(x, x+e)) psi(x+e)
//
// with theta(x, y) = int_x^y A . dl along the straight link. The product of
// hopping phases around a counter-clockwise plaquette is exp(i B h^2).

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "landloc/geometry.hpp"
#include "landloc/grid.hpp"
#include "landloc/potential.hpp"

namespace landloc::hamiltonian {

using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

/// theta(x, y) = int A . dl on the segment x -> y (exact: A is linear).
double link_integral(Vec2 x, Vec2 y, double B) noexcept;

class HamiltonianMatrix {
 public:
  /// Takes the site values of V; rejects B h^2 > pi.
  HamiltonianMatrix(Grid grid, double B, Eigen::VectorXd site_potential);

  const Grid& grid() const noexcept { return grid_; }
  double B() const noexcept { return B_; }
  double flux() const noexcept { return grid_.flux(B_); }
  Eigen::Index size() const noexcept { return matrix_.rows(); }
  const SparseMatrix& matrix() const noexcept { return matrix_; }
  const Eigen::VectorXd& potential() const noexcept { return V_; }
  /// Kinetic part (p - A)^2 alone.
  SparseMatrix kinetic() const;
  /// max |V| over the sites.
  double potential_sup() const noexcept;
  /// Gershgorin interval containing the spectrum.
  std::pair<double, double> spectral_bounds() const noexcept;
  /// max of |lo|, |hi| from spectral_bounds().
  double norm_bound() const noexcept;

  /// Coefficient c with (H psi)(x) containing -h^-2 c psi(x + h e_axis);
  /// axis 0 = x1, 1 = x2. Wall links included.
  cplx hopping_phase(std::int64_t i, std::int64_t j, int axis) const noexcept;
  /// Product of hopping phases around the counter-clockwise plaquette with
  /// lower-left corner (i, j).
  cplx plaquette(std::int64_t i, std::int64_t j) const noexcept;

 private:
  Grid grid_;
  double B_;
  Eigen::VectorXd V_;
  SparseMatrix matrix_;
};

/// Sites of `grid` sampled from V.
Eigen::VectorXd sample_on_grid(const Grid& grid, const std::function<double(Vec2)>& V);
/// Cutoff (or any function) at the sites.
Eigen::VectorXd weights_on_grid(const Grid& grid, const std::function<double(Vec2)>& f);

/// Rejects samples whose coupling region misses a site whose bump reaches
/// the grid square.
HamiltonianMatrix assemble(double B, const potential::PotentialSample& V, const Grid& grid);
HamiltonianMatrix assemble(double B, const std::function<double(Vec2)>& V, const Grid& grid);
HamiltonianMatrix assemble_free(double B, const Grid& grid);

/// Largest |plaquette - exp(i B h^2)| over the grid.
double plaquette_error(const HamiltonianMatrix& H);

/// Coordinate list "row col re im", one nonzero per line, 0-based.
void write_coo(std::ostream& os, const SparseMatrix& M);

/// Sparse LDL^* of H - sigma with a symbolic analysis reused across shifts.
/// Counts eigenvalues below sigma by Sylvester inertia.
class InertiaCounter {
 public:
  explicit InertiaCounter(const SparseMatrix& H);
  /// Number of eigenvalues < sigma. Throws if a pivot vanishes (sigma on
  /// the spectrum to machine precision).
  std::size_t count_below(double sigma);

 private:
  SparseMatrix H_;
  SparseMatrix shifted_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

std::size_t count_below(const SparseMatrix& H, double sigma);
std::size_t count_below(const HamiltonianMatrix& H, double sigma);

struct SpectralData {
  Eigen::VectorXd eigenvalues;  // ascending
  std::optional<Eigen::MatrixXcd> eigenvectors;
  double window_lo = 0.0;
  double window_hi = 0.0;
  /// ||H v - E v|| per pair.
  Eigen::VectorXd residuals;
  double matrix_norm = 0.0;
  int iterations = 0;
  std::string method;
};

struct EigsOptions {
  bool vectors = true;
  std::uint64_t seed = 1;
  int max_iterations = 500;
  /// Residual target relative to the Gershgorin norm bound.
  double tolerance = 1e-10;
  /// Dense solver at or below this dimension.
  Eigen::Index dense_limit = 500;
};

/// Eigenpairs with eigenvalue in [lo, hi). Above the dense limit: block
/// shift-invert subspace iteration about the window center, block size from
/// the inertia count plus a buffer, Rayleigh-Ritz with H. Throws
/// std::runtime_error with iteration diagnostics on non-convergence.
SpectralData eigs_window(const SparseMatrix& H, double lo, double hi, const EigsOptions& opts = {});
SpectralData eigs_window(const HamiltonianMatrix& H, double lo, double hi,
                         const EigsOptions& opts = {});
/// Lowest k eigenpairs.
SpectralData eigs_lowest(const SparseMatrix& H, Eigen::Index k, const EigsOptions& opts = {});
SpectralData eigs_lowest(const HamiltonianMatrix& H, Eigen::Index k, const EigsOptions& opts = {});
/// Full dense spectrum (small matrices).
SpectralData eigs_dense(const SparseMatrix& H, bool vectors = true);

/// dist(E, spectrum of H) from the extreme eigenvalues of (H - E)^-1 by
/// Lanczos. Returns 0 when H - E is numerically singular.
double spectral_distance(const SparseMatrix& H, double E, std::uint64_t seed = 1);

/// LU of H - z for repeated solves with H - z and its adjoint.
class ResolventSolver {
 public:
  ResolventSolver(const SparseMatrix& H, cplx z);
  cplx z() const noexcept { return z_; }
  Eigen::Index size() const noexcept { return n_; }
  Eigen::VectorXcd solve(const Eigen::VectorXcd& v) const;
  /// (H - z)^-* v = (H - conj z)^-1 v.
  Eigen::VectorXcd solve_adjoint(const Eigen::VectorXcd& v) const;

 private:
  cplx z_;
  Eigen::Index n_;
  std::shared_ptr<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>> lu_;
};

struct NormOptions {
  std::uint64_t seed = 1;
  int max_iterations = 80;
  /// Stop when the Lanczos error bound on ||A||^2 drops below this fraction.
  double tolerance = 1e-8;
};

struct NormResult {
  double value = 0.0;
  /// Lanczos residual bound translated to ||A||.
  double error_estimate = 0.0;
  int iterations = 0;
};

/// ||A|| by Lanczos on A^* A with full reorthogonalization.
NormResult operator_norm(const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& A,
                         const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& A_adjoint,
                         Eigen::Index n, const NormOptions& opts = {});

/// ||L R D|| with L sparse, R = (H - z)^-1 and D = diag(right).
NormResult resolvent_block_norm(const ResolventSolver& R, const SparseMatrix& left,
                                const Eigen::VectorXd& right, const NormOptions& opts = {});

/// ||chi_dst (H - E - i eps)^-1 chi_src|| with cutoffs evaluated at the sites.
/// Throws std::runtime_error when the factorization is singular or the
/// norm exceeds 1e13 / ||H|| (E on the spectrum with eps = 0).
NormResult green_norm(const HamiltonianMatrix& H, double E, double eps,
                      const std::function<double(Vec2)>& chi_src,
                      const std::function<double(Vec2)>& chi_dst, const NormOptions& opts = {});
NormResult green_norm(const SparseMatrix& H, double E, double eps, const Eigen::VectorXd& chi_src,
                      const Eigen::VectorXd& chi_dst, const NormOptions& opts = {});

/// Forward covariant difference (p - A)_axis as an operator from sites to
/// links; row k is the link leaving site k along `axis` (wall links kept, the
/// wall value being zero): (D psi)(x) = -i (exp(-i theta) psi(x + h e) - psi(x)) / h.
SparseMatrix covariant_difference(const HamiltonianMatrix& H, int axis);

struct GradientReport {
  double resolvent_norm = 0.0;  // ||R u||
  double M0 = 0.0;
  /// Gradient bound for each axis: lhs ||(p-A)_i R u||^2, rhs
  /// ||R u|| + (2 M0 + |E|) ||R u||^2.
  std::array<double, 2> lhs_axis{};
  double rhs_axis = 0.0;
  /// Localized bound: lhs sum_i ||chi_m (p-A)_i R u||^2 with chi at the link
  /// midpoint; rhs ||chi R u|| + (2 M0 + |E|) ||chi R u||^2
  /// + 2 sum_i ||(d_i chi) R u|| ||chi_m (p-A)_i R u||, where (d_i chi) R u
  /// is the difference quotient of chi times the link average of R u.
  double lhs_local = 0.0;
  double rhs_local = 0.0;
  double slack_axis() const noexcept;
  double slack_local() const noexcept { return rhs_local - lhs_local; }
  bool pass(double tol = 1e-8) const noexcept {
    return slack_axis() >= -tol && slack_local() >= -tol;
  }
};

/// Both sides of the gradient bounds for R = (H - E - i eps)^-1 and a unit
/// vector u. chi must satisfy 0 <= chi <= 1; it is evaluated at sites, link
/// midpoints and the wall. Rejects ||u|| != 1.
GradientReport gradient_bound_check(const HamiltonianMatrix& H, const ResolventSolver& R,
                                    const Eigen::VectorXcd& u, double E,
                                    const std::function<double(Vec2)>& chi = nullptr);
GradientReport gradient_bound_check(const HamiltonianMatrix& H, const Eigen::VectorXcd& u, double E,
                                    double eps, const std::function<double(Vec2)>& chi = nullptr);

/// W(chi) = chi H - H chi; only the hopping part survives.
SparseMatrix commutator(const Eigen::VectorXd& chi, const SparseMatrix& H);

struct ResidualReport {
  double residual = 0.0;  // max over probes of ||lhs - rhs||
  double scale = 0.0;     // max over probes of ||lhs||
  double relative() const noexcept { return scale > 0.0 ? residual / scale : residual; }
};

/// R_L chi v - chi R_R v - R_L W(chi) R_R v over random probes v, with R_X
/// the resolvents at z of the large-box operator and of the localized one.
/// Both must live on the same grid and carry equal potentials on supp chi.
ResidualReport geometric_resolvent_check(const HamiltonianMatrix& H_large,
                                         const HamiltonianMatrix& H_local,
                                         const Eigen::VectorXd& chi, cplx z,
                                         std::size_t probes = 4, std::uint64_t seed = 1);

/// Two-step expansion: chi_out R_L chi_core v against
/// chi_out R_L W(chi_local) R_local W(chi_in) R_L chi_core v.
/// Requires chi_in = 1 on supp chi_core, chi_out chi_in = 0,
/// chi_out chi_local = 0 and chi_local = 1 wherever W(chi_in) has a row.
ResidualReport gre_composite_check(const HamiltonianMatrix& H_large,
                                   const HamiltonianMatrix& H_local,
                                   const Eigen::VectorXd& chi_local, const Eigen::VectorXd& chi_in,
                                   const Eigen::VectorXd& chi_out, const Eigen::VectorXd& chi_core,
                                   cplx z, std::size_t probes = 4, std::uint64_t seed = 1);

}  // namespace landloc::hamiltonian
