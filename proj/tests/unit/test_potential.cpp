#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "landloc/percolation.hpp"
#include "landloc/potential.hpp"
#include "landloc/quadrature.hpp"

using namespace landloc;
using namespace landloc::potential;
namespace perc = landloc::percolation;

namespace {

// Brute-force max overlap on a fine grid of the unit cell (a lower bound that
// is exact once the grid resolves the maximal lens).
int grid_overlap(double r, int n) {
  int best = 0;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 p{(ix + 0.5) / n, (iy + 0.5) / n};
      int c = 0;
      for (int jy = -3; jy <= 3; ++jy)
        for (int jx = -3; jx <= 3; ++jx) c += norm(p - Vec2{double(jx), double(jy)}) < r;
      best = std::max(best, c);
    }
  return best;
}

}  // namespace

TEST_CASE("bump: closed-form values, C2 edge and gradient") {
  const SingleSiteBump u;
  u.validate();
  CHECK(bump_eval(u, {0, 0}) == 1.0);
  CHECK(bump_eval(u, {u.r_u, 0}) == 0.0);
  CHECK(bump_eval(u, {0, 0.5 * u.r_u}) == doctest::Approx(0.421875).epsilon(1e-15));
  CHECK(bump_eval(u, {0, 0.5 * u.r_u}) == doctest::Approx(u.C_0));
  // One-sided second difference at the edge vanishes like h: near the edge
  // u ~ 8 ((r_u - |x|)/r_u)^3, so |u''| <= 48 * 2h / r_u^3 on [r_u - 2h, r_u].
  for (double h : {1e-3, 1e-4, 1e-5}) {
    const double r = u.r_u;
    const double d2 = (u({r, 0}) - 2 * u({r - h, 0}) + u({r - 2 * h, 0})) / (h * h);
    CHECK(std::abs(d2) <= 96.0 * h / (r * r * r));
  }
  const Vec2 x{0.11, -0.07};
  const double e = 1e-6;
  const Vec2 g = u.gradient(x);
  CHECK(g.x == doctest::Approx((u({x.x + e, x.y}) - u({x.x - e, x.y})) / (2 * e)).epsilon(1e-6));
  CHECK(g.y == doctest::Approx((u({x.x, x.y + e}) - u({x.x, x.y - e})) / (2 * e)).epsilon(1e-6));
  double gmax = 0.0;
  for (int i = 0; i <= 20000; ++i) gmax = std::max(gmax, norm(u.gradient({u.r_u * i / 20000.0, 0})));
  CHECK(gmax == doctest::Approx(u.gradient_bound()).epsilon(1e-6));

  SingleSiteBump bad = u;
  bad.r_0 = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = u;
  bad.C_0 = 0.9;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK(u.admissible());
  CHECK_FALSE(SingleSiteBump::covering().admissible());
}

TEST_CASE("max_overlap agrees with a brute-force grid count") {
  for (double r : {0.35, 0.5, 0.6, 0.75, 1.0, 1.3}) CHECK_MESSAGE(max_overlap(r) == grid_overlap(r, 400), "r_u=" << r);
  CHECK(max_overlap(0.35) == 1);
  CHECK(cover_lower_bound(SingleSiteBump{}) == 0.0);
  CHECK(cover_lower_bound(SingleSiteBump::covering()) > 0.4);
}

TEST_CASE("coupling densities: normalization, zero mean, closed-form mass") {
  const GaussLegendre rule(30);
  for (CouplingSpec spec : {CouplingSpec{CouplingFamily::uniform, 2.0, 0.0},
                            CouplingSpec{CouplingFamily::truncated_gaussian, 1.0, 0.4},
                            CouplingSpec{CouplingFamily::truncated_gaussian, 3.0, 2.0}}) {
    spec.validate();
    const auto g = [&](double l) { return spec.density(l); };
    CHECK(std::abs(rule.integrate(g, -spec.M, spec.M, 16) - 1.0) < 1e-10);
    CHECK(std::abs(rule.integrate([&](double l) { return l * g(l); }, -spec.M, spec.M, 16)) < 1e-10);
    CHECK(occupation_probability(spec, spec.M) == 1.0);
    CHECK(occupation_probability(spec, -spec.M) == 0.0);
    CHECK(occupation_probability(spec, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
    double prev = 0.0;
    for (int k = -20; k <= 20; ++k) {
      const double p = occupation_probability(spec, spec.M * k / 20.0);
      CHECK(p >= prev);
      prev = p;
    }
  }
  const CouplingSpec gs{CouplingFamily::truncated_gaussian, 1.0, 0.4};
  const double a = 0.3;
  const double s2 = gs.sigma * std::sqrt(2.0);
  const double exact = (std::erf(a / s2) + std::erf(gs.M / s2)) / (2.0 * std::erf(gs.M / s2));
  CHECK(occupation_probability(gs, a) == doctest::Approx(exact).epsilon(1e-12));
  CHECK(occupation_probability(CouplingSpec{}, 0.25) == doctest::Approx(0.625).epsilon(1e-13));
  CHECK_THROWS(CouplingSpec{CouplingFamily::uniform, -1.0, 0.0}.validate());
}

TEST_CASE("is_occupied predicate") {
  const double M = 1.0, B = 10.0;
  CHECK(is_occupied(-M, 10.5, B));
  CHECK_FALSE(is_occupied(M, 10.5, B));
  CHECK_FALSE(is_occupied(0.25, 10.5, B));  // strict at (E - B)/2
  CHECK(is_occupied(0.2499, 10.5, B));
  // Mirrored side below B.
  CHECK(is_occupied(M, 9.5, B));
  CHECK_FALSE(is_occupied(-0.25, 9.5, B));
  CHECK(occupied_probability(CouplingSpec{}, 9.5, B) == doctest::Approx(0.625));
}

TEST_CASE("sample_couplings: support, mean, seeds") {
  const CouplingSpec spec{CouplingFamily::uniform, 1.5, 0.0};
  const auto s = sample_couplings(spec, {{0, 0}, {99, 99}}, 12);
  double sum = 0.0;
  for (double l : s.couplings()) {
    CHECK(std::abs(l) <= spec.M);
    sum += l;
  }
  CHECK(std::abs(sum / 1e4) <= 3.0 * spec.M / (std::sqrt(3.0) * 100.0));
  const auto t = sample_couplings(spec, {{0, 0}, {99, 99}}, 13);
  CHECK(s.couplings() != t.couplings());
  CHECK(s.couplings() == sample_couplings(spec, {{0, 0}, {99, 99}}, 12).couplings());

  const CouplingSpec gs{CouplingFamily::truncated_gaussian, 1.0, 0.4};
  const auto gsample = sample_couplings(gs, {{0, 0}, {99, 99}}, 4);
  const GaussLegendre rule(30);
  const double var = rule.integrate([&](double l) { return l * l * gs.density(l); }, -1, 1, 16);
  double m2 = 0.0;
  for (double l : gsample.couplings()) m2 += l * l;
  CHECK(std::abs(m2 / 1e4 - var) < 4.0 * var * std::sqrt(2.0 / 1e4) * 2.0);

  const auto occ = sample_occupied_couplings(gs, {{0, 0}, {30, 30}}, 10.4, 10.0, 3);
  for (double l : occ.couplings()) CHECK(l < 0.2);
  const auto mir = sample_occupied_couplings(gs, {{0, 0}, {30, 30}}, 9.6, 10.0, 3);
  for (double l : mir.couplings()) CHECK(l > -0.2);
}

TEST_CASE("eval_potential: trivial and two-site closed forms") {
  const SiteBox box{{-3, -3}, {3, 3}};
  const auto zero = constant_couplings(0.0, box);
  CHECK(zero({0.1, 0.2}) == 0.0);

  PotentialSample one(SingleSiteBump{}, CouplingSpec{}, box);
  one.set_coupling({1, 0}, 0.7);
  for (Vec2 x : {Vec2{1.1, 0.05}, Vec2{0.9, -0.2}, Vec2{0.0, 0.0}})
    CHECK(one(x) == doctest::Approx(0.7 * SingleSiteBump{}(x - Vec2{1, 0})));

  const auto wide = SingleSiteBump::with_radius(0.6);
  PotentialSample two(wide, CouplingSpec{}, box);
  two.set_coupling({0, 0}, 0.3);
  two.set_coupling({1, 0}, -0.8);
  const double half = std::pow(1.0 - 0.25 / 0.36, 3);
  CHECK(two({0.5, 0.0}) == doctest::Approx((0.3 - 0.8) * half).epsilon(1e-14));
  CHECK_THROWS_AS(two.set_coupling({4, 0}, 1.0), std::out_of_range);
}

TEST_CASE("M0 bounds |V| on a dense grid") {
  for (double r : {0.35, 0.6, 0.75}) {
    const auto s = sample_couplings(CouplingSpec{CouplingFamily::uniform, 1.0, 0.0}, {{-4, -4}, {4, 4}}, 8,
                                    SingleSiteBump::with_radius(r));
    double vmax = 0.0;
    for (int iy = 0; iy <= 200; ++iy)
      for (int ix = 0; ix <= 200; ++ix) vmax = std::max(vmax, std::abs(s({-2 + 4.0 * ix / 200, -2 + 4.0 * iy / 200})));
    CHECK(vmax <= s.M0());
    CHECK(s.M0() == doctest::Approx(max_overlap(r)));
  }
}

TEST_CASE("translation and JSON round trip") {
  const auto s = sample_couplings(CouplingSpec{CouplingFamily::truncated_gaussian, 1.0, 0.3}, {{-2, -1}, {3, 4}}, 5);
  const auto t = s.translated({2, -1});
  CHECK(t.coupling({2, -1}) == s.coupling({0, 0}));
  CHECK(t({2.1, -0.9}) == doctest::Approx(s({0.1, 0.1})));

  const auto back = potential_from_json(to_json(s));
  CHECK(back.couplings() == s.couplings());
  CHECK(back.region() == s.region());
  CHECK(back.seed() == s.seed());
  CHECK(back.spec().family == s.spec().family);
  CHECK(back.bump().r_u == s.bump().r_u);
}

TEST_CASE("ribbon geometry") {
  perc::Circuit single;
  single.vertices = {{0, 0}, {1, 0}};
  single.bonds = {perc::Bond{{0, 0}, perc::Axis::horizontal}};
  const auto rib = build_ribbon(single, 0.35);
  const double r1 = 1.0 / std::sqrt(2.0) - 0.35;
  CHECK(rib.r_1() == doctest::Approx(r1));
  // Physical bond from (-1/2,-1/2) to (1/2,1/2).
  const Vec2 n{-1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  CHECK(rib.contains((r1 - 1e-9) * n));
  CHECK_FALSE(rib.contains((r1 + 1e-6) * n));
  const Vec2 end{0.5, 0.5};
  const Vec2 out{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  CHECK(rib.contains(end + (r1 - 1e-9) * out));
  CHECK_FALSE(rib.contains(end + (r1 + 1e-6) * out));
  CHECK(rib.width() >= 2.0 * r1);
  CHECK_THROWS_AS(build_ribbon(single, 0.71), std::invalid_argument);

  const perc::Annulus an{{0, 0}, 4};
  const auto c = perc::find_closed_circuit(perc::BondConfig(an.outer(), true), an);
  const auto ring = build_ribbon(*c, 0.35);
  CHECK(ring.outer_clearance() >= 1.0 / std::sqrt(2.0) + 0.35 - 1e-12);
  CHECK(ring.inner_clearance() >= 1.0 / std::sqrt(2.0) + 0.35 - 1e-12);
}

TEST_CASE("verify_ribbon_condition: trivial pass and constructed failure") {
  const perc::Annulus an{{0, 0}, 2};
  const auto c = perc::find_closed_circuit(perc::BondConfig(an.outer(), true), an);
  const auto rib = build_ribbon(*c, 0.35);
  const SiteBox sites{{-8, -2}, {8, 14}};
  const double B = 10.0, E = 10.4;
  const auto zero = constant_couplings(0.0, sites);
  const auto ok = verify_ribbon_condition(rib, zero, E, B, std::nullopt, 16, 1);
  CHECK(ok.pass);
  CHECK(ok.margin == doctest::Approx(0.2));

  auto bad = zero;
  const Vec2i j = rib.sites()[3];
  bad.set_coupling(j, 1.0);
  const auto fail = verify_ribbon_condition(rib, bad, E, B, std::nullopt, 16, 1);
  CHECK_FALSE(fail.pass);
  CHECK(norm(fail.worst_point - to_real(j)) < 0.35);
}

TEST_CASE("occupied circuits always carry a valid ribbon") {
  const perc::Annulus an{{0, 0}, 3};
  const SiteBox sites{{-12, -2}, {12, 20}};
  const CouplingSpec spec{CouplingFamily::truncated_gaussian, 1.0, 0.6};
  std::size_t tested = 0;
  for (std::uint64_t t = 0; tested < 1000; ++t) {
    REQUIRE(t < 5000);
    const double B = 10.0;
    const double E = (t % 2 == 0) ? 10.8 : 9.2;  // both sides of the Landau level
    const auto s = sample_couplings(spec, sites, stream_seed(31, t));
    const auto bonds = occupied_bonds(s, E, B, an.outer());
    const auto c = perc::find_closed_circuit(bonds, an);
    if (!c) continue;
    ++tested;
    const auto rib = build_ribbon(*c, s.bump().r_u);
    for (Vec2i j : rib.sites()) REQUIRE(is_occupied(s.coupling(j), E, B));
    const auto chk = verify_ribbon_condition(rib, s, E, B, std::nullopt, 6, t);
    CHECK(chk.pass);
  }
}

TEST_CASE("mollifier: unit mass and smoothing consistency") {
  const GaussLegendre rule(20);
  const double eps = 0.1;
  const double mass = rule.integrate([&](double r) { return 2.0 * M_PI * r * mollifier({r, 0}, eps); }, 0, eps);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

  const auto s = sample_couplings(CouplingSpec{}, {{-4, -4}, {4, 4}}, 21);
  const MollifiedPotential v(s, eps);
  const double grad = s.spec().M * s.bump().gradient_bound() * max_overlap(s.bump().r_u);
  Rng rng(2);
  for (int k = 0; k < 500; ++k) {
    const Vec2 x{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    CHECK(std::abs(v(x) - s(x)) <= eps * grad);
  }

  const perc::Annulus an{{0, 0}, 2};
  const auto c = perc::find_closed_circuit(perc::BondConfig(an.outer(), true), an);
  const auto rib = build_ribbon(*c, 0.35);
  const auto raw = verify_ribbon_condition(rib, s, 10.5, 10.0, std::nullopt, 8, 3);
  const auto smooth = verify_ribbon_condition(rib, [&](Vec2 x) { return v(x); }, 10.5, 10.0, std::nullopt, 8, 3);
  CHECK(std::abs(raw.margin - smooth.margin) < eps * grad);
}
