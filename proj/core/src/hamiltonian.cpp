#include "landloc/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "landloc/rng.hpp"

namespace landloc::hamiltonian {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr std::array<Vec2i, 2> kAxis{Vec2i{1, 0}, Vec2i{0, 1}};

VectorXcd random_vector(Index n, Rng& rng) {
  VectorXcd v(n);
  for (Index k = 0; k < n; ++k) v[k] = cplx(rng.normal(), rng.normal());
  return v;
}

SparseMatrix shifted(const SparseMatrix& H, cplx z) {
  SparseMatrix I(H.rows(), H.cols());
  I.setIdentity();
  SparseMatrix M = H - z * I;
  M.makeCompressed();
  return M;
}

double gershgorin_norm(const SparseMatrix& H) {
  double lo = 0.0, hi = 0.0;
  bool first = true;
  VectorXd off = VectorXd::Zero(H.rows());
  VectorXd diag = VectorXd::Zero(H.rows());
  for (Index c = 0; c < H.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(H, c); it; ++it) {
      if (it.row() == it.col())
        diag[it.row()] = it.value().real();
      else
        off[it.row()] += std::abs(it.value());
    }
  for (Index k = 0; k < H.rows(); ++k) {
    const double a = diag[k] - off[k], b = diag[k] + off[k];
    lo = first ? a : std::min(lo, a);
    hi = first ? b : std::max(hi, b);
    first = false;
  }
  return std::max({std::abs(lo), std::abs(hi), 1e-300});
}

// Lanczos with full reorthogonalization for the extreme eigenvalues of a
// Hermitian operator. Returns the tridiagonal Ritz values, the error bounds
// beta_k |s_k| and the iteration count.
struct LanczosResult {
  VectorXd ritz;
  VectorXd bounds;
  int iterations = 0;
};

template <class Apply, class Done>
LanczosResult lanczos(const Apply& apply, Index n, int max_iter, std::uint64_t seed, Done&& done) {
  Rng rng(seed);
  const int m_max = static_cast<int>(std::min<Index>(max_iter, n));
  MatrixXcd V(n, m_max + 1);
  std::vector<double> alpha, beta;
  VectorXcd v = random_vector(n, rng);
  V.col(0) = v / v.norm();
  LanczosResult out;
  for (int k = 0; k < m_max; ++k) {
    VectorXcd w = apply(VectorXcd(V.col(k)));
    const double a = V.col(k).dot(w).real();
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass)
      w -= V.leftCols(k + 1) * (V.leftCols(k + 1).adjoint() * w);
    const double b = w.norm();
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k + 1, k + 1);
    for (int i = 0; i <= k; ++i) {
      T(i, i) = alpha[i];
      if (i < k) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    out.ritz = es.eigenvalues();
    out.bounds = (b * es.eigenvectors().row(k).cwiseAbs()).transpose();
    out.iterations = k + 1;
    if (done(out) || b <= 1e-14 * std::max(1.0, out.ritz.cwiseAbs().maxCoeff())) break;
    beta.push_back(b);
    V.col(k + 1) = w / b;
  }
  return out;
}

Grid grid_check(const HamiltonianMatrix& a, const HamiltonianMatrix& b) {
  const Grid& g = a.grid();
  const Grid& o = b.grid();
  if (!g.same_shape(o) || g.center().x != o.center().x || g.center().y != o.center().y ||
      a.B() != b.B())
    throw std::invalid_argument("resolvent check: operators live on different grids");
  return g;
}

}  // namespace

double link_integral(Vec2 x, Vec2 y, double B) noexcept {
  const Vec2 m{0.5 * (x.x + y.x), 0.5 * (x.y + y.y)};
  return 0.5 * B * (m.y * (y.x - x.x) - m.x * (y.y - x.y));
}

HamiltonianMatrix::HamiltonianMatrix(Grid grid, double B, VectorXd site_potential)
    : grid_(grid), B_(B), V_(std::move(site_potential)) {
  if (!std::isfinite(B) || B < 0.0) throw std::invalid_argument("assemble: B must be >= 0");
  if (grid_.flux(B) > std::numbers::pi)
    throw std::invalid_argument("assemble: flux per plaquette B h^2 exceeds pi (aliasing)");
  const auto n = static_cast<Index>(grid_.size());
  if (V_.size() != n) throw std::invalid_argument("assemble: potential size does not match grid");
  const double h = grid_.h();
  const double t = 1.0 / (h * h);
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(5 * n));
  for (Index k = 0; k < n; ++k) {
    const auto i = grid_.i_of(static_cast<std::size_t>(k));
    const auto j = grid_.j_of(static_cast<std::size_t>(k));
    trip.emplace_back(k, k, cplx(4.0 * t + V_[k], 0.0));
    for (int ax = 0; ax < 2; ++ax) {
      const auto i2 = i + kAxis[ax].x, j2 = j + kAxis[ax].y;
      if (!grid_.inside(i2, j2)) continue;
      const auto k2 = static_cast<Index>(grid_.index(i2, j2));
      const cplx c = -t * hopping_phase(i, j, ax);
      trip.emplace_back(k, k2, c);
      trip.emplace_back(k2, k, std::conj(c));
    }
  }
  matrix_.resize(n, n);
  matrix_.setFromTriplets(trip.begin(), trip.end());
  matrix_.makeCompressed();
}

SparseMatrix HamiltonianMatrix::kinetic() const {
  SparseMatrix K = matrix_;
  for (Index k = 0; k < K.rows(); ++k) K.coeffRef(k, k) -= V_[k];
  return K;
}

double HamiltonianMatrix::potential_sup() const noexcept {
  return V_.size() ? V_.cwiseAbs().maxCoeff() : 0.0;
}

std::pair<double, double> HamiltonianMatrix::spectral_bounds() const noexcept {
  const double t = 1.0 / (grid_.h() * grid_.h());
  if (!V_.size()) return {0.0, 0.0};
  return {V_.minCoeff(), V_.maxCoeff() + 8.0 * t};
}

double HamiltonianMatrix::norm_bound() const noexcept {
  const auto [lo, hi] = spectral_bounds();
  return std::max(std::abs(lo), std::abs(hi));
}

cplx HamiltonianMatrix::hopping_phase(std::int64_t i, std::int64_t j, int axis) const noexcept {
  const Vec2 x = grid_.point(i, j);
  const Vec2 y = grid_.point(i + kAxis[axis].x, j + kAxis[axis].y);
  return std::polar(1.0, -link_integral(x, y, B_));
}

cplx HamiltonianMatrix::plaquette(std::int64_t i, std::int64_t j) const noexcept {
  // (i,j) -> (i+1,j) -> (i+1,j+1) -> (i,j+1) -> (i,j); reversed links conjugate.
  return hopping_phase(i, j, 0) * hopping_phase(i + 1, j, 1) *
         std::conj(hopping_phase(i, j + 1, 0)) * std::conj(hopping_phase(i, j, 1));
}

VectorXd sample_on_grid(const Grid& grid, const std::function<double(Vec2)>& V) {
  VectorXd out(static_cast<Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) out[static_cast<Index>(k)] = V(grid.point(k));
  return out;
}

VectorXd weights_on_grid(const Grid& grid, const std::function<double(Vec2)>& f) {
  return sample_on_grid(grid, f);
}

HamiltonianMatrix assemble(double B, const potential::PotentialSample& V, const Grid& grid) {
  const double half = 0.5 * grid.side();
  const double r = V.bump().r_u;
  const auto lo_x = static_cast<std::int64_t>(std::floor(grid.center().x - half - r));
  const auto hi_x = static_cast<std::int64_t>(std::ceil(grid.center().x + half + r));
  const auto lo_y = static_cast<std::int64_t>(std::floor(grid.center().y - half - r));
  const auto hi_y = static_cast<std::int64_t>(std::ceil(grid.center().y + half + r));
  for (auto x = lo_x; x <= hi_x; ++x)
    for (auto y = lo_y; y <= hi_y; ++y) {
      const double dx = std::max({0.0, grid.center().x - half - x, x - grid.center().x - half});
      const double dy = std::max({0.0, grid.center().y - half - y, y - grid.center().y - half});
      if (std::hypot(dx, dy) < r && !V.region().contains({x, y}))
        throw std::invalid_argument("assemble: coupling region does not cover the grid");
    }
  return HamiltonianMatrix(grid, B, sample_on_grid(grid, [&](Vec2 x) { return V(x); }));
}

HamiltonianMatrix assemble(double B, const std::function<double(Vec2)>& V, const Grid& grid) {
  return HamiltonianMatrix(grid, B, sample_on_grid(grid, V));
}

HamiltonianMatrix assemble_free(double B, const Grid& grid) {
  return HamiltonianMatrix(grid, B, VectorXd::Zero(static_cast<Index>(grid.size())));
}

double plaquette_error(const HamiltonianMatrix& H) {
  const cplx target = std::polar(1.0, H.flux());
  const auto n = H.grid().n();
  double worst = 0.0;
  for (auto j = -n; j < n; ++j)
    for (auto i = -n; i < n; ++i) worst = std::max(worst, std::abs(H.plaquette(i, j) - target));
  return worst;
}

void write_coo(std::ostream& os, const SparseMatrix& M) {
  std::ostringstream line;
  line.precision(17);
  for (Index c = 0; c < M.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(M, c); it; ++it) {
      line.str("");
      line << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag()
           << '\n';
      os << line.str();
    }
}

// ---- inertia ----

InertiaCounter::InertiaCounter(const SparseMatrix& H) : H_(H), shifted_(H) {
  shifted_.makeCompressed();
  ldlt_.analyzePattern(shifted_);
}

std::size_t InertiaCounter::count_below(double sigma) {
  shifted_ = shifted(H_, sigma);
  ldlt_.factorize(shifted_);
  if (ldlt_.info() != Eigen::Success)
    throw std::runtime_error("count_below: LDL factorization failed at the shift");
  const auto d = ldlt_.vectorD();
  const double scale = gershgorin_norm(H_);
  std::size_t neg = 0;
  for (Index k = 0; k < d.size(); ++k) {
    const double v = d[k].real();
    if (std::abs(v) <= 1e-15 * scale)
      throw std::runtime_error("count_below: shift coincides with an eigenvalue");
    if (v < 0.0) ++neg;
  }
  return neg;
}

std::size_t count_below(const SparseMatrix& H, double sigma) {
  InertiaCounter c(H);
  return c.count_below(sigma);
}

std::size_t count_below(const HamiltonianMatrix& H, double sigma) {
  return count_below(H.matrix(), sigma);
}

// ---- eigensolvers ----

SpectralData eigs_dense(const SparseMatrix& H, bool vectors) {
  const MatrixXcd D(H);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(
      D, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigs_dense: solver failed");
  SpectralData out;
  out.eigenvalues = es.eigenvalues();
  out.matrix_norm = gershgorin_norm(H);
  out.window_lo = -std::numeric_limits<double>::infinity();
  out.window_hi = std::numeric_limits<double>::infinity();
  out.method = "dense";
  if (vectors) {
    out.eigenvectors = es.eigenvectors();
    const MatrixXcd R = H * es.eigenvectors() - es.eigenvectors() * out.eigenvalues.asDiagonal();
    out.residuals = R.colwise().norm().transpose();
  } else {
    out.residuals = VectorXd::Zero(out.eigenvalues.size());
  }
  return out;
}

namespace {

SpectralData select(const SpectralData& full, double lo, double hi) {
  std::vector<Index> keep;
  for (Index k = 0; k < full.eigenvalues.size(); ++k)
    if (full.eigenvalues[k] >= lo && full.eigenvalues[k] < hi) keep.push_back(k);
  SpectralData out;
  out.window_lo = lo;
  out.window_hi = hi;
  out.matrix_norm = full.matrix_norm;
  out.method = full.method;
  const auto m = static_cast<Index>(keep.size());
  out.eigenvalues.resize(m);
  out.residuals.resize(m);
  if (full.eigenvectors) out.eigenvectors = MatrixXcd(full.eigenvectors->rows(), m);
  for (Index c = 0; c < m; ++c) {
    out.eigenvalues[c] = full.eigenvalues[keep[c]];
    out.residuals[c] = full.residuals[keep[c]];
    if (full.eigenvectors) out.eigenvectors->col(c) = full.eigenvectors->col(keep[c]);
  }
  return out;
}

// Block shift-invert subspace iteration for the k eigenvalues closest to
// sigma, with locking: Ritz pairs among the wanted ones that meet the
// residual target are frozen and deflated from the active block, whose
// buffer of extra vectors stays fixed.
SpectralData shift_invert(const SparseMatrix& H, double sigma, Index k, const EigsOptions& opts) {
  const Index n = H.rows();
  const double norm = gershgorin_norm(H);
  const double tol = opts.tolerance * norm;
  const Index buffer = std::min(n - k, std::max<Index>(12, k / 3));
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  double s = sigma;
  for (int attempt = 0; attempt < 3; ++attempt) {
    ldlt.compute(shifted(H, s));
    if (ldlt.info() == Eigen::Success && ldlt.vectorD().cwiseAbs().minCoeff() > 1e-14 * norm) break;
    s += 1e-9 * norm * (attempt + 1);
  }
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("eigs: factorization of H - sigma failed");

  Rng rng(opts.seed);
  MatrixXcd X(n, k + buffer);
  for (Index c = 0; c < X.cols(); ++c) X.col(c) = random_vector(n, rng);
  MatrixXcd locked(n, k);
  VectorXd locked_val(k), locked_res(k);
  Index nl = 0;

  double worst = 0.0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    MatrixXcd Y = ldlt.solve(X);
    for (int pass = 0; pass < 2 && nl > 0; ++pass)
      Y -= locked.leftCols(nl) * (locked.leftCols(nl).adjoint() * Y);
    const Index m = Y.cols();
    Eigen::HouseholderQR<MatrixXcd> qr(Y);
    const MatrixXcd Q = qr.householderQ() * MatrixXcd::Identity(n, m);
    const MatrixXcd HQ = H * Q;
    MatrixXcd G = Q.adjoint() * HQ;
    G = 0.5 * (G + G.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(G);
    std::vector<Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return std::abs(es.eigenvalues()[a] - sigma) < std::abs(es.eigenvalues()[b] - sigma);
    });
    MatrixXcd W(m, m);
    VectorXd theta(m);
    for (Index c = 0; c < m; ++c) {
      W.col(c) = es.eigenvectors().col(order[static_cast<std::size_t>(c)]);
      theta[c] = es.eigenvalues()[order[static_cast<std::size_t>(c)]];
    }
    X = Q * W;
    const Index want = k - nl;
    const MatrixXcd R = HQ * W.leftCols(want) - X.leftCols(want) * theta.head(want).asDiagonal();
    const VectorXd res = R.colwise().norm().transpose();
    worst = res.maxCoeff();
    std::vector<Index> keep;
    for (Index c = 0; c < m; ++c) {
      if (c < want && res[c] <= tol) {
        locked.col(nl) = X.col(c);
        locked_val[nl] = theta[c];
        locked_res[nl] = res[c];
        ++nl;
      } else {
        keep.push_back(c);
      }
    }
    if (nl == k) {
      std::vector<Index> idx(static_cast<std::size_t>(k));
      std::iota(idx.begin(), idx.end(), Index{0});
      std::sort(idx.begin(), idx.end(), [&](Index a, Index b) { return locked_val[a] < locked_val[b]; });
      SpectralData out;
      out.matrix_norm = norm;
      out.method = "shift-invert subspace";
      out.iterations = it;
      out.eigenvalues.resize(k);
      out.residuals.resize(k);
      if (opts.vectors) out.eigenvectors = MatrixXcd(n, k);
      for (Index c = 0; c < k; ++c) {
        const Index src = idx[static_cast<std::size_t>(c)];
        out.eigenvalues[c] = locked_val[src];
        out.residuals[c] = locked_res[src];
        if (opts.vectors) out.eigenvectors->col(c) = locked.col(src);
      }
      return out;
    }
    // Active block: the unconverged wanted vectors plus the fixed buffer.
    const Index active = std::min<Index>(static_cast<Index>(keep.size()), k - nl + buffer);
    MatrixXcd next(n, active);
    for (Index c = 0; c < active; ++c) next.col(c) = X.col(keep[static_cast<std::size_t>(c)]);
    X = std::move(next);
  }
  std::ostringstream msg;
  msg << "eigs: no convergence after " << opts.max_iterations << " iterations (block "
      << k + buffer << ", wanted " << k << ", locked " << nl << ", worst residual " << worst
      << ", target " << tol << ")";
  throw std::runtime_error(msg.str());
}

}  // namespace

SpectralData eigs_window(const SparseMatrix& H, double lo, double hi, const EigsOptions& opts) {
  if (!(lo < hi)) throw std::invalid_argument("eigs: empty window");
  const double norm = gershgorin_norm(H);
  if (hi < -norm || lo > norm) throw std::invalid_argument("eigs: window outside the spectral bounds");
  if (H.rows() <= opts.dense_limit) return select(eigs_dense(H, opts.vectors), lo, hi);

  InertiaCounter counter(H);
  const auto below_lo = counter.count_below(lo);
  const auto below_hi = counter.count_below(hi);
  const auto k = static_cast<Index>(below_hi - below_lo);
  SpectralData out;
  if (k > 0) out = shift_invert(H, 0.5 * (lo + hi), k, opts);
  out.window_lo = lo;
  out.window_hi = hi;
  out.matrix_norm = norm;
  if (k == 0) {
    out.method = "inertia";
    if (opts.vectors) out.eigenvectors = MatrixXcd(H.rows(), 0);
  }
  return out;
}

SpectralData eigs_window(const HamiltonianMatrix& H, double lo, double hi, const EigsOptions& opts) {
  return eigs_window(H.matrix(), lo, hi, opts);
}

SpectralData eigs_lowest(const SparseMatrix& H, Index k, const EigsOptions& opts) {
  if (k < 1 || k > H.rows()) throw std::invalid_argument("eigs: k out of range");
  if (H.rows() <= opts.dense_limit) {
    SpectralData full = eigs_dense(H, opts.vectors);
    const double hi = k < H.rows() ? 0.5 * (full.eigenvalues[k - 1] + full.eigenvalues[k])
                                   : std::numeric_limits<double>::infinity();
    return select(full, -std::numeric_limits<double>::infinity(), hi);
  }
  // Bracket the lowest eigenvalue by inertia bisection and shift just below
  // it, so that the k nearest eigenvalues are the k lowest and a
  // near-degenerate bottom cluster still separates.
  const double norm = gershgorin_norm(H);
  InertiaCounter counter(H);
  double lo = -norm - 1.0, hi = norm + 1.0;
  while (hi - lo > 1e-9 * norm) {
    const double mid = 0.5 * (lo + hi);
    std::size_t c = 0;
    try {
      c = counter.count_below(mid);
    } catch (const std::runtime_error&) {
      c = 1;  // mid is an eigenvalue to working precision
    }
    (c >= 1 ? hi : lo) = mid;
  }
  const double sigma = lo;
  SpectralData out = shift_invert(H, sigma, k, opts);
  out.window_lo = sigma;
  out.window_hi = out.eigenvalues[k - 1];
  return out;
}

SpectralData eigs_lowest(const HamiltonianMatrix& H, Index k, const EigsOptions& opts) {
  return eigs_lowest(H.matrix(), k, opts);
}

double spectral_distance(const SparseMatrix& H, double E, std::uint64_t seed) {
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(shifted(H, E));
  const double norm = gershgorin_norm(H);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().cwiseAbs().minCoeff() <= 1e-15 * norm)
    return 0.0;
  const auto res = lanczos(
      [&](const VectorXcd& v) { return VectorXcd(ldlt.solve(v)); }, H.rows(), 120, seed,
      [](const LanczosResult& r) {
        const Index m = r.ritz.size();
        if (m < 3) return false;
        const double top = std::max(std::abs(r.ritz[0]), std::abs(r.ritz[m - 1]));
        const Index at = std::abs(r.ritz[0]) > std::abs(r.ritz[m - 1]) ? 0 : m - 1;
        return r.bounds[at] <= 1e-10 * top;
      });
  const Index m = res.ritz.size();
  const double top = std::max(std::abs(res.ritz[0]), std::abs(res.ritz[m - 1]));
  return 1.0 / top;
}

// ---- resolvents ----

ResolventSolver::ResolventSolver(const SparseMatrix& H, cplx z)
    : z_(z), n_(H.rows()),
      lu_(std::make_shared<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>>()) {
  lu_->compute(shifted(H, z));
  if (lu_->info() != Eigen::Success)
    throw std::runtime_error("resolvent: H - z is singular to working precision");
}

VectorXcd ResolventSolver::solve(const VectorXcd& v) const { return lu_->solve(v); }

VectorXcd ResolventSolver::solve_adjoint(const VectorXcd& v) const {
  return lu_->adjoint().solve(v);
}

NormResult operator_norm(const std::function<VectorXcd(const VectorXcd&)>& A,
                         const std::function<VectorXcd(const VectorXcd&)>& A_adjoint, Index n,
                         const NormOptions& opts) {
  const auto res = lanczos(
      [&](const VectorXcd& v) { return A_adjoint(A(v)); }, n, opts.max_iterations, opts.seed,
      [&](const LanczosResult& r) {
        const Index m = r.ritz.size();
        return m >= 2 && r.bounds[m - 1] <= opts.tolerance * std::max(r.ritz[m - 1], 1e-300);
      });
  const Index m = res.ritz.size();
  NormResult out;
  const double lam = std::max(res.ritz[m - 1], 0.0);
  out.value = std::sqrt(lam);
  out.error_estimate = out.value > 0.0 ? res.bounds[m - 1] / (2.0 * out.value) : 0.0;
  out.iterations = res.iterations;
  return out;
}

NormResult resolvent_block_norm(const ResolventSolver& R, const SparseMatrix& left,
                                const VectorXd& right, const NormOptions& opts) {
  if (right.size() != R.size() || left.cols() != R.size())
    throw std::invalid_argument("resolvent_block_norm: dimension mismatch");
  const SparseMatrix left_adj = left.adjoint();
  if (right.cwiseAbs().maxCoeff() == 0.0 || left.nonZeros() == 0) return {};
  return operator_norm(
      [&](const VectorXcd& v) { return VectorXcd(left * R.solve(right.cast<cplx>().cwiseProduct(v))); },
      [&](const VectorXcd& w) {
        return VectorXcd(right.cast<cplx>().cwiseProduct(R.solve_adjoint(left_adj * w)));
      },
      R.size(), opts);
}

NormResult green_norm(const SparseMatrix& H, double E, double eps, const VectorXd& chi_src,
                      const VectorXd& chi_dst, const NormOptions& opts) {
  const ResolventSolver R(H, cplx(E, eps));
  SparseMatrix left(H.rows(), H.cols());
  std::vector<Eigen::Triplet<cplx>> trip;
  for (Index k = 0; k < chi_dst.size(); ++k)
    if (chi_dst[k] != 0.0) trip.emplace_back(k, k, chi_dst[k]);
  left.setFromTriplets(trip.begin(), trip.end());
  const NormResult out = resolvent_block_norm(R, left, chi_src, opts);
  const double norm = gershgorin_norm(H);
  if (!std::isfinite(out.value) || out.value * norm > 1e13)
    throw std::runtime_error("green_norm: near-singular resolvent (E on the spectrum?)");
  return out;
}

NormResult green_norm(const HamiltonianMatrix& H, double E, double eps,
                      const std::function<double(Vec2)>& chi_src,
                      const std::function<double(Vec2)>& chi_dst, const NormOptions& opts) {
  return green_norm(H.matrix(), E, eps, weights_on_grid(H.grid(), chi_src),
                    weights_on_grid(H.grid(), chi_dst), opts);
}

// ---- gradient bounds ----

namespace {

// Links leaving the sites (i, j) with -n <= i <= n-1 along x1 (axis 0), or
// the analogue along x2; walls are the sites with |i| = n or |j| = n.
struct LinkRow {
  std::int64_t i, j;
  Index from, to;  // -1 for a wall endpoint
};

std::vector<LinkRow> links(const Grid& g, int axis) {
  std::vector<LinkRow> out;
  const auto n = g.n();
  for (auto t = -n + 1; t <= n - 1; ++t)
    for (auto s = -n; s <= n - 1; ++s) {
      const std::int64_t si = axis == 0 ? s : t, sj = axis == 0 ? t : s;
      const std::int64_t ti = si + kAxis[axis].x, tj = sj + kAxis[axis].y;
      out.push_back({si, sj, g.inside(si, sj) ? static_cast<Index>(g.index(si, sj)) : -1,
                     g.inside(ti, tj) ? static_cast<Index>(g.index(ti, tj)) : -1});
    }
  return out;
}

}  // namespace

SparseMatrix covariant_difference(const HamiltonianMatrix& H, int axis) {
  const auto rows = links(H.grid(), axis);
  const double h = H.grid().h();
  std::vector<Eigen::Triplet<cplx>> trip;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& L = rows[r];
    const auto ri = static_cast<Index>(r);
    if (L.to >= 0) trip.emplace_back(ri, L.to, cplx(0.0, -1.0 / h) * H.hopping_phase(L.i, L.j, axis));
    if (L.from >= 0) trip.emplace_back(ri, L.from, cplx(0.0, 1.0 / h));
  }
  SparseMatrix D(static_cast<Index>(rows.size()), H.size());
  D.setFromTriplets(trip.begin(), trip.end());
  return D;
}

double GradientReport::slack_axis() const noexcept {
  return rhs_axis - std::max(lhs_axis[0], lhs_axis[1]);
}

GradientReport gradient_bound_check(const HamiltonianMatrix& H, const ResolventSolver& R,
                                    const VectorXcd& u, double E,
                                    const std::function<double(Vec2)>& chi) {
  const double un = u.norm();
  if (un == 0.0) throw std::invalid_argument("gradient_bound_check: zero vector");
  if (std::abs(un - 1.0) > 1e-10) throw std::invalid_argument("gradient_bound_check: ||u|| != 1");
  const Grid& g = H.grid();
  const auto c = [&](Vec2 x) { return chi ? chi(x) : 1.0; };
  const VectorXcd phi = R.solve(u);
  GradientReport rep;
  rep.M0 = H.potential_sup();
  rep.resolvent_norm = phi.norm();
  const double coef = 2.0 * rep.M0 + std::abs(E);
  rep.rhs_axis = rep.resolvent_norm + coef * rep.resolvent_norm * rep.resolvent_norm;

  VectorXcd chi_phi(phi.size());
  for (Index k = 0; k < phi.size(); ++k) chi_phi[k] = c(g.point(static_cast<std::size_t>(k))) * phi[k];
  const double chi_phi_norm = chi_phi.norm();
  rep.rhs_local = chi_phi_norm + coef * chi_phi_norm * chi_phi_norm;

  const double h = g.h();
  for (int ax = 0; ax < 2; ++ax) {
    double full = 0.0, local = 0.0, cross = 0.0;
    for (const auto& L : links(g, ax)) {
      const cplx a = L.from >= 0 ? phi[L.from] : cplx{};
      const cplx b = L.to >= 0 ? H.hopping_phase(L.i, L.j, ax) * phi[L.to] : cplx{};
      const Vec2 x = g.point(L.i, L.j);
      const Vec2 y = g.point(L.i + kAxis[ax].x, L.j + kAxis[ax].y);
      const double cx = c(x), cy = c(y);
      const double d2 = std::norm((b - a) / h);
      full += d2;
      const double cm = 0.5 * (cx + cy);
      local += cm * cm * d2;
      const double dchi = (cy - cx) / h;
      cross += std::norm(dchi * 0.5 * (a + b));
    }
    rep.lhs_axis[static_cast<std::size_t>(ax)] = full;
    rep.lhs_local += local;
    rep.rhs_local += 2.0 * std::sqrt(cross) * std::sqrt(local);
  }
  return rep;
}

GradientReport gradient_bound_check(const HamiltonianMatrix& H, const VectorXcd& u, double E,
                                    double eps, const std::function<double(Vec2)>& chi) {
  const ResolventSolver R(H.matrix(), cplx(E, eps));
  return gradient_bound_check(H, R, u, E, chi);
}

// ---- geometric resolvent equation ----

SparseMatrix commutator(const VectorXd& chi, const SparseMatrix& H) {
  if (chi.size() != H.rows()) throw std::invalid_argument("commutator: dimension mismatch");
  std::vector<Eigen::Triplet<cplx>> trip;
  for (Index c = 0; c < H.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(H, c); it; ++it) {
      const double d = chi[it.row()] - chi[it.col()];
      if (d != 0.0) trip.emplace_back(it.row(), it.col(), d * it.value());
    }
  SparseMatrix W(H.rows(), H.cols());
  W.setFromTriplets(trip.begin(), trip.end());
  return W;
}

ResidualReport geometric_resolvent_check(const HamiltonianMatrix& H_large,
                                         const HamiltonianMatrix& H_local, const VectorXd& chi,
                                         cplx z, std::size_t probes, std::uint64_t seed) {
  grid_check(H_large, H_local);
  if (chi.size() != H_large.size()) throw std::invalid_argument("gre: cutoff size mismatch");
  for (Index k = 0; k < chi.size(); ++k)
    if (chi[k] != 0.0 &&
        std::abs(H_large.potential()[k] - H_local.potential()[k]) >
            1e-12 * std::max(1.0, std::abs(H_large.potential()[k])))
      throw std::invalid_argument("gre: potentials differ on the support of chi");
  const ResolventSolver RL(H_large.matrix(), z), RR(H_local.matrix(), z);
  const SparseMatrix W = commutator(chi, H_large.matrix());
  Rng rng(seed);
  ResidualReport rep;
  for (std::size_t p = 0; p < probes; ++p) {
    const VectorXcd v = random_vector(H_large.size(), rng);
    const VectorXcd lhs = RL.solve(chi.cast<cplx>().cwiseProduct(v));
    const VectorXcd rr = RR.solve(v);
    const VectorXcd rhs = chi.cast<cplx>().cwiseProduct(rr) + RL.solve(W * rr);
    rep.residual = std::max(rep.residual, (lhs - rhs).norm());
    rep.scale = std::max(rep.scale, lhs.norm());
  }
  return rep;
}

ResidualReport gre_composite_check(const HamiltonianMatrix& H_large,
                                   const HamiltonianMatrix& H_local, const VectorXd& chi_local,
                                   const VectorXd& chi_in, const VectorXd& chi_out,
                                   const VectorXd& chi_core, cplx z, std::size_t probes,
                                   std::uint64_t seed) {
  grid_check(H_large, H_local);
  const Index n = H_large.size();
  for (const auto* v : {&chi_local, &chi_in, &chi_out, &chi_core})
    if (v->size() != n) throw std::invalid_argument("gre: cutoff size mismatch");
  const SparseMatrix W_in = commutator(chi_in, H_large.matrix());
  const SparseMatrix W_local = commutator(chi_local, H_large.matrix());
  VectorXd w_rows = VectorXd::Zero(n);
  for (Index c = 0; c < W_in.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(W_in, c); it; ++it) w_rows[it.row()] = 1.0;
  for (Index k = 0; k < n; ++k) {
    if (chi_core[k] != 0.0 && chi_in[k] != 1.0)
      throw std::invalid_argument("gre: chi_in must equal 1 on the core");
    if (chi_out[k] * chi_in[k] != 0.0 || chi_out[k] * chi_local[k] != 0.0)
      throw std::invalid_argument("gre: chi_out must be disjoint from chi_in and chi_local");
    if (w_rows[k] != 0.0 && chi_local[k] != 1.0)
      throw std::invalid_argument("gre: chi_local must equal 1 where W(chi_in) acts");
    if (chi_local[k] != 0.0 && H_large.potential()[k] != H_local.potential()[k])
      throw std::invalid_argument("gre: potentials differ on the support of chi_local");
  }
  const ResolventSolver RL(H_large.matrix(), z), RR(H_local.matrix(), z);
  Rng rng(seed);
  ResidualReport rep;
  const VectorXcd core = chi_core.cast<cplx>(), out = chi_out.cast<cplx>();
  for (std::size_t p = 0; p < probes; ++p) {
    const VectorXcd v = random_vector(n, rng);
    const VectorXcd x = RL.solve(core.cwiseProduct(v));
    const VectorXcd direct = out.cwiseProduct(x);
    const VectorXcd composite = out.cwiseProduct(RL.solve(W_local * RR.solve(W_in * x)));
    rep.residual = std::max(rep.residual, (direct - composite).norm());
    rep.scale = std::max(rep.scale, direct.norm());
  }
  return rep;
}

}  // namespace landloc::hamiltonian
