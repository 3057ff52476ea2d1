#include "landloc/potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "json.hpp"
#include "landloc/quadrature.hpp"

namespace landloc::potential {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

std::int64_t icell(double v) { return static_cast<std::int64_t>(std::floor(v)); }

}  // namespace

// ------------------------------------------------------------------ bump --

SingleSiteBump SingleSiteBump::with_radius(double r_u) {
  SingleSiteBump b;
  b.r_u = r_u;
  b.r_0 = 0.5 * r_u;
  b.C_0 = 0.421875;
  return b;
}

SingleSiteBump SingleSiteBump::covering() { return with_radius(1.0); }

void SingleSiteBump::validate() const {
  if (!(r_u > 0.0)) throw std::invalid_argument("SingleSiteBump: r_u must be positive");
  if (!(r_0 > 0.0 && r_0 < r_u)) throw std::invalid_argument("SingleSiteBump: need 0 < r_0 < r_u");
  if (!(C_0 > 0.0 && C_0 <= 1.0)) throw std::invalid_argument("SingleSiteBump: need 0 < C_0 <= 1");
  // The profile is radially decreasing, so the inner bound is checked at r_0.
  if (profile(r_0 / r_u) < C_0 * (1.0 - 1e-14))
    throw std::invalid_argument("SingleSiteBump: u < C_0 somewhere on B(0, r_0)");
}

bool SingleSiteBump::admissible() const noexcept { return r_u < kInvSqrt2; }

double SingleSiteBump::profile(double t) const noexcept {
  if (t >= 1.0) return 0.0;
  const double s = 1.0 - t * t;
  return s * s * s;
}

double SingleSiteBump::operator()(Vec2 x) const noexcept {
  const double t2 = dot(x, x) / (r_u * r_u);
  if (t2 >= 1.0) return 0.0;
  const double s = 1.0 - t2;
  return s * s * s;
}

Vec2 SingleSiteBump::gradient(Vec2 x) const noexcept {
  const double t2 = dot(x, x) / (r_u * r_u);
  if (t2 >= 1.0) return {};
  const double s = 1.0 - t2;
  return (-6.0 * s * s / (r_u * r_u)) * x;
}

double SingleSiteBump::gradient_bound() const noexcept {
  return 6.0 * 16.0 / (25.0 * std::sqrt(5.0)) / r_u;
}

double bump_eval(const SingleSiteBump& bump, Vec2 x) { return bump(x); }

int max_overlap(double r_u) {
  if (!(r_u > 0.0)) throw std::invalid_argument("max_overlap: r_u must be positive");
  const auto k = static_cast<std::int64_t>(std::ceil(r_u)) + 1;
  const auto open_count = [&](Vec2 p) {
    int c = 0;
    for (auto jy = icell(p.y - r_u); jy <= icell(p.y + r_u) + 1; ++jy)
      for (auto jx = icell(p.x - r_u); jx <= icell(p.x + r_u) + 1; ++jx)
        if (norm(p - to_real(Vec2i{jx, jy})) < r_u) ++c;
    return c;
  };
  // Intersections of open disks are open with circle arcs as edges, so the
  // maximum is attained next to a disk center or a pairwise circle crossing.
  int best = open_count({0.0, 0.0});
  std::vector<Vec2> centers;
  for (std::int64_t y = -k; y <= k; ++y)
    for (std::int64_t x = -k; x <= k; ++x) centers.push_back(to_real(Vec2i{x, y}));
  // By Z^2 invariance one circle of each crossing pair can sit at the origin.
  for (const Vec2 c : centers) {
    const double d = norm(c);
    if (d == 0.0 || d >= 2.0 * r_u) continue;
    const double h = std::sqrt(r_u * r_u - 0.25 * d * d);
    const Vec2 perp{-c.y / d, c.x / d};
    for (double sgn : {-1.0, 1.0}) {
      const Vec2 p = 0.5 * c + (sgn * h) * perp;
      for (int m = 0; m < 64; ++m) {
        const double th = 2.0 * std::numbers::pi * (m + 0.5) / 64.0;
        best = std::max(best, open_count(p + 1e-7 * Vec2{std::cos(th), std::sin(th)}));
      }
    }
  }
  return best;
}

double cover_lower_bound(const SingleSiteBump& bump, int n) {
  double lowest = std::numeric_limits<double>::infinity();
  const auto reach = static_cast<std::int64_t>(std::ceil(bump.r_u)) + 1;
  for (int iy = 0; iy <= n; ++iy)
    for (int ix = 0; ix <= n; ++ix) {
      const Vec2 x{static_cast<double>(ix) / n, static_cast<double>(iy) / n};
      double s = 0.0;
      for (std::int64_t jy = -reach; jy <= reach + 1; ++jy)
        for (std::int64_t jx = -reach; jx <= reach + 1; ++jx) s += bump(x - to_real(Vec2i{jx, jy}));
      lowest = std::min(lowest, s);
    }
  return lowest;
}

// ------------------------------------------------------------- couplings --

std::string_view to_string(CouplingFamily f) {
  return f == CouplingFamily::uniform ? "uniform" : "truncated_gaussian";
}

CouplingFamily family_from_string(std::string_view s) {
  if (s == "uniform") return CouplingFamily::uniform;
  if (s == "truncated_gaussian" || s == "gaussian") return CouplingFamily::truncated_gaussian;
  throw std::invalid_argument("unknown coupling family '" + std::string(s) + "'");
}

void CouplingSpec::validate() const {
  if (!(M > 0.0)) throw std::invalid_argument("CouplingSpec: M must be positive");
  if (family == CouplingFamily::truncated_gaussian && !(sigma > 0.0))
    throw std::invalid_argument("CouplingSpec: sigma must be positive");
}

double CouplingSpec::density(double lambda) const noexcept {
  if (lambda < -M || lambda > M) return 0.0;
  if (family == CouplingFamily::uniform) return 0.5 / M;
  const double z = sigma * std::sqrt(2.0 * std::numbers::pi) * std::erf(M / (sigma * std::sqrt(2.0)));
  return std::exp(-0.5 * lambda * lambda / (sigma * sigma)) / z;
}

double CouplingSpec::sup_density() const noexcept { return density(0.0); }

double CouplingSpec::sample(Rng& rng, double lo, double hi) const {
  lo = std::max(lo, -M);
  hi = std::min(hi, M);
  if (!(lo < hi)) throw std::invalid_argument("CouplingSpec::sample: empty interval");
  if (family == CouplingFamily::uniform) return rng.uniform(lo, hi);
  // Rejection from the uniform envelope; the density peaks at the point of
  // [lo, hi] closest to zero.
  const double peak = std::clamp(0.0, lo, hi);
  const double s2 = 2.0 * sigma * sigma;
  for (;;) {
    const double x = rng.uniform(lo, hi);
    if (rng.uniform() < std::exp(-(x * x - peak * peak) / s2)) return x;
  }
}

double CouplingSpec::mass(double lo, double hi) const {
  lo = std::max(lo, -M);
  hi = std::min(hi, M);
  if (!(lo < hi)) return 0.0;
  static const GaussLegendre rule(20);
  return std::clamp(rule.integrate([this](double l) { return density(l); }, lo, hi, 8), 0.0, 1.0);
}

double occupation_probability(const CouplingSpec& spec, double a) {
  if (a >= spec.M) return 1.0;
  return spec.mass(-spec.M, a);
}

bool is_occupied(double lambda, double E, double B) noexcept {
  const double a = 0.5 * (E - B);
  return E >= B ? lambda < a : lambda > a;
}

double occupied_probability(const CouplingSpec& spec, double E, double B) {
  const double a = 0.5 * (E - B);
  return E >= B ? occupation_probability(spec, a) : spec.mass(a, spec.M);
}

// ---------------------------------------------------------------- sample --

PotentialSample::PotentialSample(SingleSiteBump bump, CouplingSpec spec, SiteBox region,
                                 std::uint64_t seed)
    : bump_(bump), spec_(spec), region_(region), seed_(seed) {
  if (region.hi.x < region.lo.x || region.hi.y < region.lo.y)
    throw std::invalid_argument("PotentialSample: empty site region");
  lambda_.assign(region.size(), 0.0);
}

std::size_t PotentialSample::slot(Vec2i j) const noexcept {
  return static_cast<std::size_t>((j.y - region_.lo.y) * (region_.hi.x - region_.lo.x + 1) +
                                  (j.x - region_.lo.x));
}

double PotentialSample::coupling(Vec2i j) const noexcept {
  return region_.contains(j) ? lambda_[slot(j)] : 0.0;
}

void PotentialSample::set_coupling(Vec2i j, double lambda) {
  if (!region_.contains(j)) throw std::out_of_range("PotentialSample: site outside region");
  lambda_[slot(j)] = lambda;
}

double PotentialSample::operator()(Vec2 x) const noexcept {
  const double r = bump_.r_u;
  const auto x0 = std::max(icell(x.x - r), region_.lo.x), x1 = std::min(icell(x.x + r) + 1, region_.hi.x);
  const auto y0 = std::max(icell(x.y - r), region_.lo.y), y1 = std::min(icell(x.y + r) + 1, region_.hi.y);
  double v = 0.0;
  for (auto jy = y0; jy <= y1; ++jy)
    for (auto jx = x0; jx <= x1; ++jx) {
      const double l = lambda_[slot({jx, jy})];
      if (l != 0.0) v += l * bump_(x - to_real(Vec2i{jx, jy}));
    }
  return v;
}

Vec2 PotentialSample::gradient(Vec2 x) const noexcept {
  const double r = bump_.r_u;
  const auto x0 = std::max(icell(x.x - r), region_.lo.x), x1 = std::min(icell(x.x + r) + 1, region_.hi.x);
  const auto y0 = std::max(icell(x.y - r), region_.lo.y), y1 = std::min(icell(x.y + r) + 1, region_.hi.y);
  Vec2 g{};
  for (auto jy = y0; jy <= y1; ++jy)
    for (auto jx = x0; jx <= x1; ++jx)
      g = g + lambda_[slot({jx, jy})] * bump_.gradient(x - to_real(Vec2i{jx, jy}));
  return g;
}

double PotentialSample::M0() const noexcept { return spec_.M * max_overlap(bump_.r_u); }

PotentialSample PotentialSample::translated(Vec2i a) const {
  PotentialSample out = *this;
  out.region_ = {region_.lo + a, region_.hi + a};
  return out;
}

PotentialSample sample_couplings(const CouplingSpec& spec, SiteBox region, std::uint64_t seed,
                                 SingleSiteBump bump) {
  spec.validate();
  PotentialSample s(bump, spec, region, seed);
  Rng rng(seed);
  for (auto y = region.lo.y; y <= region.hi.y; ++y)
    for (auto x = region.lo.x; x <= region.hi.x; ++x) s.set_coupling({x, y}, spec.sample(rng));
  return s;
}

PotentialSample sample_occupied_couplings(const CouplingSpec& spec, SiteBox region, double E,
                                          double B, std::uint64_t seed, SingleSiteBump bump) {
  spec.validate();
  const double a = 0.5 * (E - B);
  if (a == 0.0) throw std::invalid_argument("sample_occupied_couplings: E = B has no occupied side");
  PotentialSample s(bump, spec, region, seed);
  Rng rng(seed);
  for (auto y = region.lo.y; y <= region.hi.y; ++y)
    for (auto x = region.lo.x; x <= region.hi.x; ++x)
      s.set_coupling({x, y}, a > 0.0 ? spec.sample(rng, -spec.M, a) : spec.sample(rng, a, spec.M));
  return s;
}

PotentialSample constant_couplings(double lambda, SiteBox region, SingleSiteBump bump,
                                   CouplingSpec spec) {
  PotentialSample s(bump, spec, region, 0);
  for (auto y = region.lo.y; y <= region.hi.y; ++y)
    for (auto x = region.lo.x; x <= region.hi.x; ++x) s.set_coupling({x, y}, lambda);
  return s;
}

percolation::BondConfig occupied_bonds(const PotentialSample& sample, double E, double B,
                                       percolation::BoxRegion region,
                                       percolation::DualLattice lattice) {
  percolation::BondConfig config(region, false, occupied_probability(sample.spec(), E, B),
                                 sample.seed(), lattice);
  config.for_each_bond([&](const percolation::Bond& b) {
    if (is_occupied(sample.coupling(lattice.midpoint(b)), E, B)) config.set(b, true);
  });
  return config;
}

// ------------------------------------------------------------------ json --

std::string to_json(const PotentialSample& s) {
  nlohmann::json j;
  j["seed"] = s.seed();
  j["spec"] = {{"family", to_string(s.spec().family)}, {"M", s.spec().M}, {"sigma", s.spec().sigma}};
  j["bump"] = {{"profile", "(1-t^2)^3"}, {"r_u", s.bump().r_u}, {"r_0", s.bump().r_0}, {"C_0", s.bump().C_0}};
  j["region"] = {{"lo", {s.region().lo.x, s.region().lo.y}}, {"hi", {s.region().hi.x, s.region().hi.y}}};
  auto list = nlohmann::json::array();
  for (auto y = s.region().lo.y; y <= s.region().hi.y; ++y)
    for (auto x = s.region().lo.x; x <= s.region().hi.x; ++x)
      if (const double l = s.coupling({x, y}); l != 0.0) list.push_back({x, y, l});
  j["couplings"] = std::move(list);
  return j.dump();
}

PotentialSample potential_from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  CouplingSpec spec;
  spec.family = family_from_string(j.at("spec").at("family").get<std::string>());
  spec.M = j.at("spec").at("M").get<double>();
  spec.sigma = j.at("spec").at("sigma").get<double>();
  SingleSiteBump bump;
  bump.r_u = j.at("bump").at("r_u").get<double>();
  bump.r_0 = j.at("bump").at("r_0").get<double>();
  bump.C_0 = j.at("bump").at("C_0").get<double>();
  const auto& r = j.at("region");
  const SiteBox region{{r.at("lo")[0].get<std::int64_t>(), r.at("lo")[1].get<std::int64_t>()},
                       {r.at("hi")[0].get<std::int64_t>(), r.at("hi")[1].get<std::int64_t>()}};
  PotentialSample s(bump, spec, region, j.at("seed").get<std::uint64_t>());
  for (const auto& e : j.at("couplings"))
    s.set_coupling({e[0].get<std::int64_t>(), e[1].get<std::int64_t>()}, e[2].get<double>());
  return s;
}

// ---------------------------------------------------------------- ribbon --

Ribbon::Ribbon(percolation::Circuit circuit, double r_u, percolation::DualLattice lattice)
    : circuit_(std::move(circuit)), lattice_(lattice), r_u_(r_u), r_1_(kInvSqrt2 - r_u) {
  if (!(r_u > 0.0)) throw std::invalid_argument("Ribbon: r_u must be positive");
  if (r_u >= kInvSqrt2) throw std::invalid_argument("Ribbon: r_u >= 1/sqrt(2) leaves an empty ribbon");
  if (circuit_.bonds.empty()) throw std::invalid_argument("Ribbon: empty circuit");
  segments_.reserve(circuit_.bonds.size());
  for (const auto& b : circuit_.bonds)
    segments_.emplace_back(lattice_.position(b.origin), lattice_.position(b.end()));
}

double Ribbon::distance(Vec2 x) const noexcept {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& [a, b] : segments_) d = std::min(d, segment_distance(x, a, b));
  return d;
}

double Ribbon::outer_clearance() const {
  const auto box = circuit_.annulus.outer();
  const double x0 = static_cast<double>(box.lo.x - 1), x1 = static_cast<double>(box.hi().x + 1);
  const double y0 = static_cast<double>(box.lo.y - 1), y1 = static_cast<double>(box.hi().y + 1);
  double d = std::numeric_limits<double>::infinity();
  for (const auto& b : circuit_.bonds)
    for (const Vec2i v : {b.origin, b.end()}) {
      const Vec2 p = to_real(v);
      d = std::min({d, p.x - x0, x1 - p.x, p.y - y0, y1 - p.y});
    }
  // Internal lengths scale by sqrt(2) under the rotation-scaling.
  return std::sqrt(2.0) * d - r_1_;
}

double Ribbon::inner_clearance() const {
  const auto& an = circuit_.annulus;
  if (an.ell < 2) return std::numeric_limits<double>::infinity();
  const double lo_x = static_cast<double>(an.lo.x + an.ell + 1), hi_x = static_cast<double>(an.lo.x + 2 * an.ell - 1);
  const double lo_y = static_cast<double>(an.lo.y + an.ell + 1), hi_y = static_cast<double>(an.lo.y + 2 * an.ell - 1);
  double d = std::numeric_limits<double>::infinity();
  for (const auto& b : circuit_.bonds) {
    const Vec2 p = to_real(b.origin), q = to_real(b.end());
    const double dx = std::max({0.0, lo_x - std::max(p.x, q.x), std::min(p.x, q.x) - hi_x});
    const double dy = std::max({0.0, lo_y - std::max(p.y, q.y), std::min(p.y, q.y) - hi_y});
    d = std::min(d, std::hypot(dx, dy));
  }
  return std::sqrt(2.0) * d - r_1_;
}

Ribbon build_ribbon(const percolation::Circuit& circuit, double r_u, percolation::DualLattice lattice) {
  return Ribbon(circuit, r_u, lattice);
}

RibbonCheck verify_ribbon_condition(const Ribbon& ribbon, const PotentialSample& sample, double E,
                                    double B, std::optional<double> a, std::size_t n_samples,
                                    std::uint64_t seed) {
  return verify_ribbon_condition(
      ribbon, [&sample](Vec2 x) { return sample(x); }, E, B, a, n_samples, seed);
}

RibbonCheck verify_ribbon_condition(const Ribbon& ribbon, const std::function<double(Vec2)>& sample,
                                    double E, double B, std::optional<double> a,
                                    std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("verify_ribbon_condition: n_samples must be >= 1");
  const double aa = a.value_or(0.5 * std::abs(E - B));
  const bool above = E >= B;
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  Rng rng(seed);
  const double shift = rng.uniform();
  // Stay a hair inside the open stadium.
  const double r = ribbon.r_1() * (1.0 - 1e-9);

  RibbonCheck out;
  out.worst_value = above ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  const auto visit = [&](Vec2 x) {
    const double v = sample(x) + B - E;
    ++out.points;
    if (above ? v > out.worst_value : v < out.worst_value) {
      out.worst_value = v;
      out.worst_point = x;
    }
  };
  constexpr std::array<double, 5> transverse{-1.0, -0.5, 0.0, 0.5, 1.0};
  for (const auto& [p, q] : ribbon.segments()) {
    const Vec2 d = q - p;
    const Vec2 n = (1.0 / norm(d)) * Vec2{-d.y, d.x};
    for (std::size_t k = 0; k < n_samples; ++k) {
      const double s = std::fmod(shift + golden * static_cast<double>(k), 1.0);
      for (double t : transverse) visit(p + s * d + (t * r) * n);
    }
    for (const Vec2 c : {p, q})
      for (int m = 0; m < 8; ++m) {
        const double th = 2.0 * std::numbers::pi * (m + shift) / 8.0;
        for (double rho : {0.5 * r, r}) visit(c + rho * Vec2{std::cos(th), std::sin(th)});
      }
  }
  out.margin = above ? -aa - out.worst_value : out.worst_value - aa;
  out.pass = out.margin > 0.0;
  return out;
}

// ------------------------------------------------------------- mollifier --

double mollifier(Vec2 x, double eps) noexcept {
  const double t2 = dot(x, x) / (eps * eps);
  if (t2 >= 1.0) return 0.0;
  const double s = 1.0 - t2;
  return 4.0 / (std::numbers::pi * eps * eps) * s * s * s;
}

MollifiedPotential::MollifiedPotential(const PotentialSample& sample, double eps)
    : sample_(sample), eps_(eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("MollifiedPotential: eps must be positive");
  const GaussLegendre radial(10);
  constexpr int n_theta = 24;
  double total = 0.0;
  for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
    const double rho = 0.5 * eps * (radial.nodes[i] + 1.0);
    const double w = 0.5 * eps * radial.weights[i] * rho * mollifier({rho, 0.0}, eps) *
                     (2.0 * std::numbers::pi / n_theta);
    for (int m = 0; m < n_theta; ++m) {
      const double th = 2.0 * std::numbers::pi * m / n_theta;
      offsets_.push_back(rho * Vec2{std::cos(th), std::sin(th)});
      weights_.push_back(w);
      total += w;
    }
  }
  for (auto& w : weights_) w /= total;
}

double MollifiedPotential::operator()(Vec2 x) const {
  double v = 0.0;
  for (std::size_t k = 0; k < offsets_.size(); ++k) v += weights_[k] * sample_(x - offsets_[k]);
  return v;
}

}  // namespace landloc::potential
