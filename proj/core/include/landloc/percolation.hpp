#pragma once

// Bernoulli bond percolation on the dual lattice of coupling sites.
//
// The dual lattice is the square lattice rotated by 45 degrees and scaled by
// sqrt(2); the midpoint of each of its bonds is an integer coupling site.
// All combinatorics run on an internal axis-aligned Z^2 bond lattice that is
// mapped onto the physical dual lattice by a rigid rotation-scaling:
//
//   internal vertex (m, n)  ->  physical point shift - (1/2, 1/2) + (m - n, m + n)
//
// so internal horizontal bonds are the "/" bonds (midpoint with even
// coordinate sum) and internal vertical bonds are the "\" bonds (odd sum).

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "landloc/geometry.hpp"
#include "landloc/stats.hpp"

namespace landloc::percolation {

enum class Axis : std::uint8_t { horizontal, vertical };

/// Bond of the internal lattice: from `origin` to origin + unit step along `axis`.
struct Bond {
  Vec2i origin;
  Axis axis = Axis::horizontal;

  Vec2i end() const noexcept {
    return axis == Axis::horizontal ? Vec2i{origin.x + 1, origin.y} : Vec2i{origin.x, origin.y + 1};
  }
  friend constexpr bool operator==(const Bond&, const Bond&) = default;
};

class DualLattice {
 public:
  /// `shift` relocates the origin vertex by an integer vector with even
  /// coordinate sum (preserving the midpoint-parity orientation rule).
  explicit DualLattice(Vec2i shift = {});

  Vec2i shift() const noexcept { return shift_; }

  /// Coupling site at the midpoint of an internal bond.
  Vec2i midpoint(const Bond& b) const noexcept;
  /// Inverse of midpoint(): the bond whose midpoint is site j.
  Bond bond_at(Vec2i site) const noexcept;
  /// Physical position of an internal vertex.
  Vec2 position(Vec2i vertex) const noexcept;
  /// True when the bond at `site` runs along (1, 1) ("/"); otherwise (1, -1).
  static bool ascending(Vec2i site) noexcept;

 private:
  Vec2i shift_;
};

/// Axis-aligned box of internal vertices [lo, lo + (width, height)].
struct BoxRegion {
  Vec2i lo;
  std::int64_t width = 0;
  std::int64_t height = 0;

  Vec2i hi() const noexcept { return {lo.x + width, lo.y + height}; }
  bool contains(Vec2i v) const noexcept {
    return v.x >= lo.x && v.y >= lo.y && v.x <= lo.x + width && v.y <= lo.y + height;
  }
  bool contains(const Bond& b) const noexcept { return contains(b.origin) && contains(b.end()); }
  std::size_t vertex_count() const noexcept {
    return static_cast<std::size_t>((width + 1) * (height + 1));
  }
  std::size_t bond_count() const noexcept {
    return static_cast<std::size_t>(width * (height + 1) + height * (width + 1));
  }
  bool operator==(const BoxRegion&) const = default;
};

/// Occupation state of every bond of a BoxRegion.
class BondConfig {
 public:
  /// All bonds empty (or all occupied when `fill` is true); p and seed are
  /// recorded as given.
  BondConfig(BoxRegion region, bool fill = false, double p = 0.0, std::uint64_t seed = 0,
             DualLattice lattice = DualLattice{});

  const BoxRegion& region() const noexcept { return region_; }
  const DualLattice& lattice() const noexcept { return lattice_; }
  double p() const noexcept { return p_; }
  std::uint64_t seed() const noexcept { return seed_; }

  bool contains(const Bond& b) const noexcept { return region_.contains(b); }
  /// Out-of-region bonds read as empty.
  bool occupied(const Bond& b) const noexcept;
  void set(const Bond& b, bool value);
  bool occupied_at(Vec2i site) const noexcept { return occupied(lattice_.bond_at(site)); }

  std::size_t bond_count() const noexcept { return horizontal_.size() + vertical_.size(); }
  std::size_t occupied_count() const noexcept;

  /// Enumerates bonds in sampling order: horizontal row-major, then vertical.
  template <class F>
  void for_each_bond(F&& f) const {
    for (std::int64_t y = 0; y <= region_.height; ++y)
      for (std::int64_t x = 0; x < region_.width; ++x)
        f(Bond{{region_.lo.x + x, region_.lo.y + y}, Axis::horizontal});
    for (std::int64_t y = 0; y < region_.height; ++y)
      for (std::int64_t x = 0; x <= region_.width; ++x)
        f(Bond{{region_.lo.x + x, region_.lo.y + y}, Axis::vertical});
  }

 private:
  std::size_t slot(const Bond& b) const noexcept;

  BoxRegion region_;
  DualLattice lattice_;
  double p_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<std::uint8_t> horizontal_;
  std::vector<std::uint8_t> vertical_;
};

/// Bernoulli bond percolation: each bond independently occupied with
/// probability p. Bonds are thresholded from one uniform draw each, in
/// for_each_bond order, so configurations at different p with the same seed
/// are monotonically coupled.
BondConfig sample_bonds(double p, BoxRegion region, std::uint64_t seed,
                        DualLattice lattice = DualLattice{});

/// Disjoint-set forest with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n);
  std::size_t find(std::size_t i) noexcept;
  /// Returns true if two distinct sets were merged.
  bool unite(std::size_t a, std::size_t b) noexcept;
  bool connected(std::size_t a, std::size_t b) noexcept { return find(a) == find(b); }
  std::size_t size() const noexcept { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> rank_size_;
};

/// Connected components of the occupied subgraph of a BondConfig.
class ClusterIndex {
 public:
  explicit ClusterIndex(const BondConfig& config);
  /// Component label of a vertex; labels are the smallest vertex slot of the
  /// component, so they do not depend on union order.
  std::size_t label(Vec2i vertex) const;
  bool connected(Vec2i a, Vec2i b) const { return label(a) == label(b); }

 private:
  BoxRegion region_;
  std::vector<std::size_t> labels_;
};

/// Rectangle of internal vertices with `length` along its long axis and
/// `width` across it. A crossing "the long way" joins its two short sides.
struct Rectangle {
  Vec2i lo;
  std::int64_t length = 1;
  std::int64_t width = 0;
  Axis long_axis = Axis::horizontal;

  BoxRegion box() const noexcept {
    return long_axis == Axis::horizontal ? BoxRegion{lo, length, width} : BoxRegion{lo, width, length};
  }
};

/// r_{n,ℓ}: width ℓ, length nℓ, horizontal, anchored at `lo`.
Rectangle aspect_rectangle(std::int64_t n, std::int64_t ell, Vec2i lo = {});

/// Long-way crossing by occupied bonds lying in the rectangle. Uses a union
/// find with one virtual vertex merged onto each short side.
bool crossing_exists(const BondConfig& config, const Rectangle& rect);
/// r_{n,ℓ} anchored at the config region's lower-left vertex.
bool crossing_exists(const BondConfig& config, std::int64_t n, std::int64_t ell);

struct CrossingEstimate {
  Rectangle rect;
  double p = 0.0;
  std::uint64_t seed = 0;
  Proportion crossing;
};

/// Monte Carlo estimate of the crossing probability; trial t uses
/// stream_seed(seed, t) and samples exactly the rectangle.
CrossingEstimate estimate_crossing_prob(const Rectangle& rect, double p, std::size_t trials,
                                        std::uint64_t seed, unsigned jobs = 1);
CrossingEstimate estimate_crossing_prob(std::int64_t n, std::int64_t ell, double p,
                                        std::size_t trials, std::uint64_t seed,
                                        unsigned jobs = 1);

/// Annulus a_ℓ = r_{3ℓ} \ r_ℓ: closed outer box [lo, lo + 3ℓ]^2 minus the open
/// concentric inner box of side ℓ. Bonds on the inner boundary belong to it.
struct Annulus {
  Vec2i lo;
  std::int64_t ell = 1;

  BoxRegion outer() const noexcept { return {lo, 3 * ell, 3 * ell}; }
  /// Closed inner box; the annulus excludes only its interior.
  BoxRegion inner() const noexcept { return {{lo.x + ell, lo.y + ell}, ell, ell}; }
  Vec2 center() const noexcept {
    return {static_cast<double>(lo.x) + 1.5 * static_cast<double>(ell),
            static_cast<double>(lo.y) + 1.5 * static_cast<double>(ell)};
  }
  bool contains(const Bond& b) const noexcept;
  /// The four 3ℓ x ℓ strips whose long-way crossings form a circuit.
  std::array<Rectangle, 4> strips() const noexcept;
};

/// Closed path of bonds. vertices[k] and vertices[k+1] (cyclically) are the
/// endpoints of bonds[k].
struct Circuit {
  std::vector<Vec2i> vertices;
  std::vector<Bond> bonds;
  Annulus annulus;

  /// Coupling sites of the bonds, in path order.
  std::vector<Vec2i> midpoints(const DualLattice& lattice) const;
};

struct CircuitCheck {
  bool closed = false;
  bool contained = false;
  bool occupied = false;
  std::int64_t winding = 0;
  bool valid() const noexcept { return closed && contained && occupied && winding != 0; }
};

/// Checks closure, containment in the annulus, occupation in `config` and the
/// winding number about the annulus center.
CircuitCheck check_circuit(const Circuit& circuit, const BondConfig& config);

/// Innermost closed circuit of occupied bonds in the annulus winding around
/// the inner box, or nullopt if none exists. Exact: a circuit exists iff no
/// dual path through empty bonds joins the hole to the exterior; the result is
/// the outer boundary of the hole's dual cluster, which is the unique circuit
/// of minimal enclosed area.
std::optional<Circuit> find_closed_circuit(const BondConfig& config, const Annulus& annulus);
/// Annulus anchored at the config region's lower-left vertex.
std::optional<Circuit> find_closed_circuit(const BondConfig& config, std::int64_t ell);

/// True when all four strips of the annulus are crossed the long way.
bool four_strip_crossings(const BondConfig& config, const Annulus& annulus);

struct CircuitEstimate {
  std::int64_t ell = 0;
  double p = 0.0;
  std::uint64_t seed = 0;
  Proportion circuit;
};

CircuitEstimate estimate_circuit_prob(std::int64_t ell, double p, std::size_t trials,
                                      std::uint64_t seed, unsigned jobs = 1);

struct ConnectivityFit {
  double q = 0.0;
  std::vector<std::int64_t> distances;
  std::vector<Proportion> connection;
  /// Slope of -log P vs distance; +infinity when no connection was observed.
  double rate = std::numeric_limits<double>::infinity();
  std::optional<LinearFit> fit;
};

/// Estimates the connectivity decay rate m(q) from P(0 <-> (d, 0)) in a box
/// of half-side max(d) + 8. Requires q < 1/2.
ConnectivityFit fit_connectivity_decay(double q, std::span<const std::int64_t> distances,
                                       std::size_t trials, std::uint64_t seed,
                                       unsigned jobs = 1);

}  // namespace landloc::percolation
