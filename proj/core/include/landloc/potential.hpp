#pragma once

// Anderson-type potential V(x) = sum_j lambda_j u(x - j) with couplings on Z^2,
// the occupied-bond predicate tying couplings to percolation on the dual
// lattice, and ribbons around occupied circuits.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "landloc/geometry.hpp"
#include "landloc/percolation.hpp"
#include "landloc/rng.hpp"

namespace landloc::potential {

/// u(x) = (1 - |x|^2/r_u^2)^3 on |x| < r_u, zero outside. C^2 at |x| = r_u.
struct SingleSiteBump {
  double r_u = 0.35;
  double r_0 = 0.175;
  double C_0 = 0.421875;  // (3/4)^3 = u at |x| = r_u/2

  /// Default bump with r_0 = r_u/2 and C_0 = u(r_0).
  static SingleSiteBump with_radius(double r_u);
  /// Wide bump (r_u = 1) whose translates cover the plane; violates the
  /// r_u < 1/sqrt(2) support condition and is used only for IDS comparisons.
  static SingleSiteBump covering();

  /// Throws unless 0 < r_0 < r_u, 0 < C_0 <= 1 and u >= C_0 on |x| <= r_0.
  void validate() const;
  /// r_u < 1/sqrt(2): supports of distinct sites on a dual bond stay apart.
  bool admissible() const noexcept;

  double profile(double t) const noexcept;
  double operator()(Vec2 x) const noexcept;
  Vec2 gradient(Vec2 x) const noexcept;
  /// sup |grad u| = (6/r_u) * max_t t(1-t^2)^2 = 6 * 16/(25 sqrt 5) / r_u.
  double gradient_bound() const noexcept;
};

double bump_eval(const SingleSiteBump& bump, Vec2 x);

/// Largest number of supports B(j, r_u), j in Z^2, containing a common point.
int max_overlap(double r_u);

/// Min over the unit cell of sum_j u(x - j), estimated on an n x n grid.
double cover_lower_bound(const SingleSiteBump& bump, int n = 64);

enum class CouplingFamily { uniform, truncated_gaussian };

std::string_view to_string(CouplingFamily f);
CouplingFamily family_from_string(std::string_view s);

/// Single-site distribution g on [-M, M]; both families are symmetric.
struct CouplingSpec {
  CouplingFamily family = CouplingFamily::uniform;
  double M = 1.0;
  double sigma = 0.5;  // Gaussian width before truncation

  void validate() const;
  double density(double lambda) const noexcept;
  /// ||g||_inf (attained at 0 for both families).
  double sup_density() const noexcept;
  /// Draw from g restricted to [lo, hi] (intersected with [-M, M]).
  double sample(Rng& rng, double lo, double hi) const;
  double sample(Rng& rng) const { return sample(rng, -M, M); }
  /// Probability of [lo, hi] under g by Gauss-Legendre quadrature.
  double mass(double lo, double hi) const;
};

/// p = int_{-M}^{a} g, clamped to [0, 1].
double occupation_probability(const CouplingSpec& spec, double a);

/// Bond b_j occupied at energy E: lambda_j < (E - B)/2 for E >= B; for E < B
/// the mirrored predicate lambda_j > (E - B)/2.
bool is_occupied(double lambda, double E, double B) noexcept;

/// Probability that a single bond is occupied at (E, B).
double occupied_probability(const CouplingSpec& spec, double E, double B);

/// Inclusive box of coupling sites.
struct SiteBox {
  Vec2i lo;
  Vec2i hi;

  bool contains(Vec2i j) const noexcept {
    return j.x >= lo.x && j.x <= hi.x && j.y >= lo.y && j.y <= hi.y;
  }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>((hi.x - lo.x + 1) * (hi.y - lo.y + 1));
  }
  /// Sites within Chebyshev radius r of the origin.
  static SiteBox centered(std::int64_t r) { return {{-r, -r}, {r, r}}; }
  bool operator==(const SiteBox&) const = default;
};

/// One realization of the random potential. Couplings outside `region` are 0.
class PotentialSample {
 public:
  PotentialSample(SingleSiteBump bump, CouplingSpec spec, SiteBox region, std::uint64_t seed = 0);

  const SingleSiteBump& bump() const noexcept { return bump_; }
  const CouplingSpec& spec() const noexcept { return spec_; }
  const SiteBox& region() const noexcept { return region_; }
  std::uint64_t seed() const noexcept { return seed_; }

  double coupling(Vec2i j) const noexcept;
  void set_coupling(Vec2i j, double lambda);
  const std::vector<double>& couplings() const noexcept { return lambda_; }

  double operator()(Vec2 x) const noexcept;
  Vec2 gradient(Vec2 x) const noexcept;

  /// M0 = M * max_overlap(r_u): a.s. bound on sup |V|.
  double M0() const noexcept;
  /// Same sample with every coupling moved by a: lambda'_j = lambda_{j - a}.
  PotentialSample translated(Vec2i a) const;

 private:
  std::size_t slot(Vec2i j) const noexcept;

  SingleSiteBump bump_;
  CouplingSpec spec_;
  SiteBox region_;
  std::uint64_t seed_;
  std::vector<double> lambda_;
};

/// i.i.d. couplings from g over `region`, row-major from one stream.
PotentialSample sample_couplings(const CouplingSpec& spec, SiteBox region, std::uint64_t seed,
                                 SingleSiteBump bump = {});

/// Couplings conditioned to the occupied side of the bond predicate at (E, B):
/// each lambda_j is drawn from g restricted to lambda < (E-B)/2 (E > B) or
/// lambda > (E-B)/2 (E < B).
PotentialSample sample_occupied_couplings(const CouplingSpec& spec, SiteBox region, double E,
                                          double B, std::uint64_t seed, SingleSiteBump bump = {});

PotentialSample constant_couplings(double lambda, SiteBox region, SingleSiteBump bump = {},
                                   CouplingSpec spec = {});

/// Bond configuration induced by the couplings: b_j occupied iff
/// is_occupied(lambda_j, E, B). Bonds whose site is outside the sample region
/// read lambda = 0.
percolation::BondConfig occupied_bonds(const PotentialSample& sample, double E, double B,
                                       percolation::BoxRegion region,
                                       percolation::DualLattice lattice = percolation::DualLattice{});

std::string to_json(const PotentialSample& sample);
PotentialSample potential_from_json(std::string_view text);

/// Stadium neighbourhoods R_j = {x : dist(x, b_j) < r_1}, r_1 = 1/sqrt(2) - r_u,
/// around the bonds of a circuit.
class Ribbon {
 public:
  Ribbon(percolation::Circuit circuit, double r_u,
         percolation::DualLattice lattice = percolation::DualLattice{});

  const percolation::Circuit& circuit() const noexcept { return circuit_; }
  const percolation::DualLattice& lattice() const noexcept { return lattice_; }
  double r_1() const noexcept { return r_1_; }
  double r_u() const noexcept { return r_u_; }
  /// Physical segments b_j, in circuit order.
  const std::vector<std::pair<Vec2, Vec2>>& segments() const noexcept { return segments_; }
  std::vector<Vec2i> sites() const { return circuit_.midpoints(lattice_); }

  double distance(Vec2 x) const noexcept;
  bool contains(Vec2 x) const noexcept { return distance(x) < r_1_; }
  /// Every point of the medial curve carries a full disk of radius r_1.
  double width() const noexcept { return 2.0 * r_1_; }

  /// Distances from R to the boundaries of the outer and inner boxes, taken
  /// one Gamma-bond (sqrt 2) outside the annulus on each side, so both are at
  /// least 1/sqrt(2) + r_u for any circuit in the annulus.
  double outer_clearance() const;
  /// Infinite when the shrunk inner box is empty (ell < 2).
  double inner_clearance() const;

 private:
  percolation::Circuit circuit_;
  percolation::DualLattice lattice_;
  double r_u_;
  double r_1_;
  std::vector<std::pair<Vec2, Vec2>> segments_;
};

Ribbon build_ribbon(const percolation::Circuit& circuit, double r_u,
                    percolation::DualLattice lattice = percolation::DualLattice{});

struct RibbonCheck {
  bool pass = false;
  /// Sign-aware slack: -a - max(V + B - E) for E >= B, min(V + B - E) - a for
  /// E < B. Positive means the condition holds at every sampled point.
  double margin = 0.0;
  /// Extreme attained value of V + B - E (max for E >= B, min for E < B).
  double worst_value = 0.0;
  Vec2 worst_point;
  std::size_t points = 0;
};

/// Samples V + B - E on the ribbon: n_samples low-discrepancy positions per
/// bond, tensored with transverse offsets across the stadium, plus end caps.
/// `a` defaults to |E - B|/2.
RibbonCheck verify_ribbon_condition(const Ribbon& ribbon, const PotentialSample& sample, double E,
                                    double B, std::optional<double> a, std::size_t n_samples,
                                    std::uint64_t seed);
/// Same sampling for an arbitrary potential, e.g. a mollified one.
RibbonCheck verify_ribbon_condition(const Ribbon& ribbon, const std::function<double(Vec2)>& V,
                                    double E, double B, std::optional<double> a,
                                    std::size_t n_samples, std::uint64_t seed);

/// eta_eps(x) = 4/(pi eps^2) (1 - |x|^2/eps^2)^3, unit mass.
double mollifier(Vec2 x, double eps) noexcept;

/// V convolved with eta_eps, by a polar product rule over the mollifier disk.
class MollifiedPotential {
 public:
  MollifiedPotential(const PotentialSample& sample, double eps);
  double operator()(Vec2 x) const;
  double eps() const noexcept { return eps_; }

 private:
  PotentialSample sample_;
  double eps_;
  std::vector<Vec2> offsets_;
  std::vector<double> weights_;
};

}  // namespace landloc::potential
