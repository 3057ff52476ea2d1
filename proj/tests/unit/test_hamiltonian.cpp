#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "landloc/cutoff.hpp"
#include "landloc/hamiltonian.hpp"
#include "landloc/potential.hpp"
#include "landloc/projector.hpp"
#include "landloc/rng.hpp"

using namespace landloc;
using namespace landloc::hamiltonian;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

HamiltonianMatrix random_hamiltonian(double B, const Grid& g, std::uint64_t seed, double M = 1.0) {
  potential::CouplingSpec spec{potential::CouplingFamily::uniform, M, 0.5};
  const auto r = static_cast<std::int64_t>(std::ceil(0.5 * g.side())) + 2;
  const auto c = Vec2i{static_cast<std::int64_t>(std::round(g.center().x)),
                       static_cast<std::int64_t>(std::round(g.center().y))};
  const potential::SiteBox box{{c.x - r, c.y - r}, {c.x + r, c.y + r}};
  return assemble(B, potential::sample_couplings(spec, box, seed), g);
}

VectorXcd unit_random(Eigen::Index n, Rng& rng) {
  VectorXcd v(n);
  for (Eigen::Index k = 0; k < n; ++k) v[k] = {rng.normal(), rng.normal()};
  return v / v.norm();
}

double dense_block_norm(const SparseMatrix& H, cplx z, const VectorXd& src, const VectorXd& dst) {
  const Eigen::Index n = H.rows();
  const MatrixXcd R = (MatrixXcd(H) - z * MatrixXcd::Identity(n, n)).inverse();
  const MatrixXcd A = dst.cast<cplx>().asDiagonal() * R * src.cast<cplx>().asDiagonal();
  return Eigen::JacobiSVD<MatrixXcd>(A).singularValues()[0];
}

}  // namespace

TEST_CASE("link integrals and plaquette phases") {
  const double B = 7.0;
  CHECK(link_integral({0, 0}, {1, 0}, B) == doctest::Approx(0.0));
  // A = (B/2)(x2, -x1): along x1 at height 2 the integral is B.
  CHECK(link_integral({0, 2}, {1, 2}, B) == doctest::Approx(B));
  const Grid g({0.3, -0.2}, 2.0, 0.125);
  const auto H = assemble_free(B, g);
  CHECK(plaquette_error(H) < 1e-12);
  CHECK(std::abs(H.plaquette(0, 0) - std::polar(1.0, B * 0.125 * 0.125)) < 1e-13);
}

TEST_CASE("assembly: Hermitian, flux guard, coverage guard") {
  const Grid g({0, 0}, 3.0, 0.125);
  const auto H = random_hamiltonian(12.0, g, 3);
  const SparseMatrix diff = H.matrix() - SparseMatrix(H.matrix().adjoint());
  CHECK(diff.norm() == 0.0);
  CHECK_THROWS_AS(assemble_free(210.0, g), std::invalid_argument);  // B h^2 = 3.28
  CHECK_NOTHROW(assemble_free(200.0, g));
  const auto small = potential::sample_couplings({}, potential::SiteBox::centered(1), 1);
  CHECK_NOTHROW(assemble(5.0, small, g));
  CHECK_THROWS_AS(assemble(5.0, small, Grid({0, 0}, 4.0, 0.125)), std::invalid_argument);
}

TEST_CASE("B = 0: Dirichlet product-of-sines spectrum") {
  const Grid g({0, 0}, 2.5, 0.125);  // n = 10, 19^2 sites
  const auto H = assemble_free(0.0, g);
  const double h = g.h();
  const auto n = g.n();
  std::vector<double> oracle;
  for (int a = 1; a < 2 * n; ++a)
    for (int b = 1; b < 2 * n; ++b)
      oracle.push_back((4.0 - 2.0 * std::cos(a * std::numbers::pi / (2.0 * n)) -
                        2.0 * std::cos(b * std::numbers::pi / (2.0 * n))) /
                       (h * h));
  std::sort(oracle.begin(), oracle.end());
  const auto dense = eigs_dense(H.matrix(), false);
  for (std::size_t k = 0; k < oracle.size(); ++k)
    CHECK(std::abs(dense.eigenvalues[static_cast<Eigen::Index>(k)] - oracle[k]) < 1e-10 * oracle.back());
  EigsOptions sparse;
  sparse.dense_limit = 0;
  const auto low = eigs_lowest(H, 6, sparse);
  for (int k = 0; k < 6; ++k) CHECK(std::abs(low.eigenvalues[k] - oracle[k]) < 1e-10 * oracle[k]);
}

TEST_CASE("covariant differences reproduce the kinetic form") {
  const Grid g({0.5, 0.25}, 2.0, 0.125);
  const auto H = assemble_free(9.0, g);
  const SparseMatrix D0 = covariant_difference(H, 0), D1 = covariant_difference(H, 1);
  const SparseMatrix K = SparseMatrix(D0.adjoint()) * D0 + SparseMatrix(D1.adjoint()) * D1;
  CHECK((K - H.kinetic()).norm() < 1e-10 * H.kinetic().norm());
}

TEST_CASE("lowest Landau cluster holds about B l^2 / 2pi states") {
  const double B = 10.0, ell = 8.0;
  const double expected = B * ell * ell / (2 * std::numbers::pi);
  // At h = 0.25 the flux per plaquette is 0.625 and the discrete level sits
  // near 0.92 B; count the whole cluster up to the midpoint of the first gap.
  const auto coarse = assemble_free(B, Grid({0, 0}, ell, 0.25));
  CHECK(count_below(coarse, 0.85 * B) == 0);
  const auto cluster = static_cast<double>(count_below(coarse, 2.0 * B));
  CHECK(cluster > 0.8 * expected);
  CHECK(cluster < 1.2 * expected);
  // At B h^2 <= 0.2 the bulk of the cluster lies within 5% of B.
  const auto fine = assemble_free(B, Grid({0, 0}, ell, 0.125));
  InertiaCounter counter(fine.matrix());
  const auto inside = static_cast<double>(counter.count_below(1.05 * B) - counter.count_below(0.95 * B));
  CHECK(counter.count_below(0.95 * B) == 0);
  CHECK(inside > 0.6 * expected);
  const auto low = eigs_lowest(fine, 1);
  CHECK(std::abs(low.eigenvalues[0] - B) < 0.1 * B);
}

TEST_CASE("inertia counts agree with the dense spectrum") {
  const Grid g({0, 0}, 2.0, 0.125);
  const auto H = random_hamiltonian(15.0, g, 11, 3.0);
  const auto dense = eigs_dense(H.matrix(), false);
  InertiaCounter counter(H.matrix());
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const double s = rng.uniform(dense.eigenvalues[0] - 5, dense.eigenvalues[60] + 5);
    std::size_t c = 0;
    for (Eigen::Index k = 0; k < dense.eigenvalues.size(); ++k) c += dense.eigenvalues[k] < s;
    CHECK(counter.count_below(s) == c);
  }
}

TEST_CASE("sparse windowed eigensolver matches the dense oracle") {
  const Grid g({0, 0}, 2.5, 0.125);  // 361 sites
  const auto H = random_hamiltonian(20.0, g, 5, 2.0);
  const auto dense = eigs_dense(H.matrix());
  EigsOptions opts;
  opts.dense_limit = 0;
  const double lo = 0.8 * 20.0, hi = 1.3 * 20.0;
  const auto sp = eigs_window(H, lo, hi, opts);
  std::vector<double> want;
  for (Eigen::Index k = 0; k < dense.eigenvalues.size(); ++k)
    if (dense.eigenvalues[k] >= lo && dense.eigenvalues[k] < hi) want.push_back(dense.eigenvalues[k]);
  REQUIRE(static_cast<std::size_t>(sp.eigenvalues.size()) == want.size());
  REQUIRE(!want.empty());
  for (std::size_t k = 0; k < want.size(); ++k)
    CHECK(std::abs(sp.eigenvalues[static_cast<Eigen::Index>(k)] - want[k]) < 1e-9);
  CHECK(sp.residuals.maxCoeff() <= 1e-8 * sp.matrix_norm);
  REQUIRE(sp.eigenvectors);
  const MatrixXcd& X = *sp.eigenvectors;
  CHECK((X.adjoint() * X - MatrixXcd::Identity(X.cols(), X.cols())).norm() < 1e-9);
  // Eigenspace projector equals the dense one.
  MatrixXcd P = MatrixXcd::Zero(H.size(), H.size());
  for (Eigen::Index k = 0; k < dense.eigenvalues.size(); ++k)
    if (dense.eigenvalues[k] >= lo && dense.eigenvalues[k] < hi)
      P += dense.eigenvectors->col(k) * dense.eigenvectors->col(k).adjoint();
  CHECK((P - X * X.adjoint()).norm() < 1e-7);
}

TEST_CASE("diagonal input gives exact eigenvalues") {
  const Eigen::Index n = 50;
  SparseMatrix D(n, n);
  for (Eigen::Index k = 0; k < n; ++k) D.insert(k, k) = cplx(static_cast<double>((k * 37) % n) - 10.5, 0);
  EigsOptions opts;
  opts.dense_limit = 0;
  const auto w = eigs_window(D, -3.0, 4.0, opts);
  REQUIRE(w.eigenvalues.size() == 7);
  for (Eigen::Index k = 0; k < 7; ++k) CHECK(w.eigenvalues[k] == doctest::Approx(-2.5 + k).epsilon(1e-14));
  const auto d = eigs_window(D, -3.0, 4.0);
  CHECK(d.method == "dense");
  CHECK((d.eigenvalues - w.eigenvalues).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(eigs_window(D, 1e6, 2e6, opts), std::invalid_argument);
  CHECK(spectral_distance(D, 0.2) == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("spectral distance matches the dense spectrum") {
  const auto H = random_hamiltonian(10.0, Grid({0, 0}, 2.0, 0.125), 8, 2.0);
  const auto dense = eigs_dense(H.matrix(), false);
  for (double E : {9.1, 10.0, 12.7, 30.3}) {
    const double d = (dense.eigenvalues.array() - E).abs().minCoeff();
    CHECK(spectral_distance(H.matrix(), E) == doctest::Approx(d).epsilon(1e-8));
  }
}

TEST_CASE("translating the couplings conjugates H by the magnetic translation") {
  const double B = 6.0;
  const Grid g({0.0, 0.0}, 4.0, 0.125);  // 31^2 sites
  potential::CouplingSpec spec{potential::CouplingFamily::uniform, 1.5, 0.5};
  const auto sample = potential::sample_couplings(spec, potential::SiteBox::centered(7), 21);
  for (const Vec2i a : {Vec2i{1, 0}, Vec2i{2, -3}, Vec2i{-1, 1}}) {
    const Vec2 av{static_cast<double>(a.x), static_cast<double>(a.y)};
    const auto H = assemble(B, sample, g);
    const auto H2 = assemble(B, sample.translated(a), g.shifted(av));
    const VectorXcd phi = projector::translation_phases(g, av, B);
    const SparseMatrix U = SparseMatrix(phi.asDiagonal().toDenseMatrix().sparseView());
    const SparseMatrix conj = U * H.matrix() * SparseMatrix(U.adjoint());
    CHECK((conj - H2.matrix()).norm() < 1e-12 * H.matrix().norm());
  }
}

TEST_CASE("green_norm against the dense inverse, 1/eps and monotonicity") {
  const auto H = random_hamiltonian(10.0, Grid({0, 0}, 2.0, 0.125), 4, 2.0);
  const auto left = BoxCutoff::square({-0.5, 0}, 0.8, 0.2);
  const auto right = BoxCutoff::square({0.5, 0.1}, 0.7, 0.2);
  const VectorXd src = weights_on_grid(H.grid(), left), dst = weights_on_grid(H.grid(), right);
  double previous = std::numeric_limits<double>::infinity();
  for (double eps : {0.01, 0.1, 1.0, 5.0}) {
    const double E = 11.3;
    const auto g = green_norm(H, E, eps, left, right);
    const double oracle = dense_block_norm(H.matrix(), {E, eps}, src, dst);
    CHECK(std::abs(g.value - oracle) <= 1e-3 * oracle);
    CHECK(g.value <= 1.0 / eps);
    CHECK(g.value <= previous * (1 + 1e-9));
    previous = g.value;
  }
}

TEST_CASE("green_norm of a diagonal operator") {
  const Eigen::Index n = 40;
  SparseMatrix D(n, n);
  VectorXd src(n), dst(n);
  Rng rng(6);
  for (Eigen::Index k = 0; k < n; ++k) {
    D.insert(k, k) = rng.uniform(-3, 3);
    src[k] = rng.uniform();
    dst[k] = rng.uniform() < 0.5 ? 0.0 : rng.uniform();
  }
  const double E = 0.4, eps = 0.05;
  double oracle = 0.0;
  for (Eigen::Index k = 0; k < n; ++k)
    oracle = std::max(oracle, dst[k] * src[k] / std::abs(D.coeff(k, k) - cplx(E, eps)));
  CHECK(green_norm(D, E, eps, src, dst).value == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("green_norm rejects a singular real resolvent") {
  SparseMatrix D(3, 3);
  D.insert(0, 0) = 1.0;
  D.insert(1, 1) = 2.0;
  D.insert(2, 2) = 3.0;
  const VectorXd one = VectorXd::Ones(3);
  CHECK_THROWS_AS(green_norm(D, 2.0, 0.0, one, one), std::runtime_error);
}

TEST_CASE("resolvent adjoint solve") {
  const auto H = random_hamiltonian(10.0, Grid({0, 0}, 1.5, 0.125), 9);
  const ResolventSolver R(H.matrix(), {10.5, 0.3});
  Rng rng(1);
  const VectorXcd v = unit_random(H.size(), rng);
  const MatrixXcd M = MatrixXcd(H.matrix()) - cplx(10.5, -0.3) * MatrixXcd::Identity(H.size(), H.size());
  CHECK((M * R.solve_adjoint(v) - v).norm() < 1e-10);
}

TEST_CASE("gradient bounds hold on random unit vectors") {
  const auto H = random_hamiltonian(12.0, Grid({0, 0}, 2.0, 0.125), 17, 2.0);
  const auto chi = BoxCutoff::square({0.1, -0.2}, 1.2, 0.4);
  Rng rng(33);
  double worst_axis = std::numeric_limits<double>::infinity(), worst_local = worst_axis;
  for (double E : {-3.0, 11.0, 40.0}) {
    const ResolventSolver R(H.matrix(), {E, 0.05});
    for (int t = 0; t < 334; ++t) {
      const auto rep = gradient_bound_check(H, R, unit_random(H.size(), rng), E,
                                            [&](Vec2 x) { return chi(x); });
      worst_axis = std::min(worst_axis, rep.slack_axis());
      worst_local = std::min(worst_local, rep.slack_local());
    }
  }
  CHECK(worst_axis >= -1e-8);
  CHECK(worst_local >= -1e-8);
  // Without a cutoff the localized form is the summed kinetic bound.
  const auto rep = gradient_bound_check(H, unit_random(H.size(), rng), 5.0, 0.2);
  CHECK(rep.lhs_local == doctest::Approx(rep.lhs_axis[0] + rep.lhs_axis[1]));
  CHECK(rep.pass());
}

TEST_CASE("gradient bound at V = 0, E = 0, large eps") {
  const auto H = assemble_free(10.0, Grid({0, 0}, 2.0, 0.125));
  Rng rng(2);
  const auto rep = gradient_bound_check(H, unit_random(H.size(), rng), 0.0, 1e4);
  CHECK(rep.slack_axis() > 0.0);
  CHECK(rep.rhs_axis == doctest::Approx(rep.resolvent_norm));
  CHECK_THROWS_AS(gradient_bound_check(H, VectorXcd::Zero(H.size()), 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("geometric resolvent identity") {
  const Grid g({0, 0}, 3.0, 0.125);  // 23^2 sites
  const double B = 10.0;
  const auto H = random_hamiltonian(B, g, 2, 1.5);
  const cplx z{10.8, 0.05};
  SUBCASE("chi = 1 reduces to the resolvent equation") {
    const VectorXd one = VectorXd::Ones(H.size());
    CHECK(geometric_resolvent_check(H, H, one, z).relative() < 1e-8);
  }
  SUBCASE("smooth chi with a different exterior potential") {
    const auto chi_box = BoxCutoff::square({0.2, -0.1}, 1.8, 0.5);
    const VectorXd chi = weights_on_grid(g, [&](Vec2 x) { return chi_box(x); });
    VectorXd V = H.potential();
    for (Eigen::Index k = 0; k < V.size(); ++k)
      if (chi[k] == 0.0) V[k] = 4.0;
    const HamiltonianMatrix local(g, B, V);
    CHECK(geometric_resolvent_check(H, local, chi, z).relative() < 1e-6);
    VectorXd W = H.potential();
    W.setConstant(4.0);
    CHECK_THROWS_AS(geometric_resolvent_check(H, HamiltonianMatrix(g, B, W), chi, z), std::invalid_argument);
    CHECK_THROWS_AS(geometric_resolvent_check(H, assemble_free(B, Grid({0, 0}, 3.0, 0.1)), chi, z),
                    std::invalid_argument);
  }
}

TEST_CASE("two-step resolvent expansion equals the direct block") {
  const Grid g({0, 0}, 6.0, 0.125);
  const double B = 10.0;
  const auto H = random_hamiltonian(B, g, 8, 1.0);
  const auto sup = [](Vec2 x) { return std::max(std::abs(x.x), std::abs(x.y)); };
  const auto step = [](double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  };
  const VectorXd core = weights_on_grid(g, [&](Vec2 x) { return sup(x) <= 0.5 ? 1.0 : 0.0; });
  const VectorXd in = weights_on_grid(g, [&](Vec2 x) { return 1.0 - step((sup(x) - 1.0) / 0.5); });
  const VectorXd local = weights_on_grid(g, [&](Vec2 x) {
    const double r = sup(x);
    return r < 1.6 ? step((r - 0.6) / 0.25) : 1.0 - step((r - 1.8) / 0.4);
  });
  const VectorXd out = weights_on_grid(g, [&](Vec2 x) { return sup(x) >= 2.3 ? 1.0 : 0.0; });
  VectorXd V = H.potential();
  for (Eigen::Index k = 0; k < V.size(); ++k)
    if (local[k] == 0.0) V[k] = -2.0;
  const HamiltonianMatrix Hl(g, B, V);
  const auto rep = gre_composite_check(H, Hl, local, in, out, core, {10.4, 0.1});
  CHECK(rep.scale > 0.0);
  CHECK(rep.relative() < 1e-6);
  CHECK_THROWS_AS(gre_composite_check(H, Hl, local, in, in, core, {10.4, 0.1}), std::invalid_argument);
}

TEST_CASE("coordinate export") {
  const auto H = assemble_free(3.0, Grid({0, 0}, 1.0, 0.25));
  std::ostringstream os;
  write_coo(os, H.matrix());
  std::istringstream is(os.str());
  std::string line;
  Eigen::Index lines = 0;
  while (std::getline(is, line)) ++lines;
  CHECK(lines == H.matrix().nonZeros());
}
