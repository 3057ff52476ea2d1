#include "landloc/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

#include "landloc/parallel.hpp"
#include "landloc/rng.hpp"

namespace landloc::percolation {

// ---------------------------------------------------------------- lattice --

DualLattice::DualLattice(Vec2i shift) : shift_(shift) {
  if (((shift.x + shift.y) % 2 + 2) % 2 != 0)
    throw std::invalid_argument("DualLattice: shift must have even coordinate sum");
}

Vec2i DualLattice::midpoint(const Bond& b) const noexcept {
  const auto m = b.origin.x, n = b.origin.y;
  if (b.axis == Axis::horizontal) return Vec2i{m - n, m + n} + shift_;
  return Vec2i{m - n - 1, m + n} + shift_;
}

Bond DualLattice::bond_at(Vec2i site) const noexcept {
  const Vec2i j = site - shift_;
  const auto sum = j.x + j.y;
  const auto diff = j.y - j.x;
  // Floor division keeps negative coordinates on the right vertex.
  const auto half = [](std::int64_t v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); };
  if (((sum % 2) + 2) % 2 == 0) return Bond{{half(sum), half(diff)}, Axis::horizontal};
  return Bond{{half(sum + 1), half(diff - 1)}, Axis::vertical};
}

Vec2 DualLattice::position(Vec2i vertex) const noexcept {
  const auto m = static_cast<double>(vertex.x), n = static_cast<double>(vertex.y);
  return Vec2{m - n - 0.5 + static_cast<double>(shift_.x), m + n - 0.5 + static_cast<double>(shift_.y)};
}

bool DualLattice::ascending(Vec2i site) noexcept { return ((site.x + site.y) % 2 + 2) % 2 == 0; }

// ------------------------------------------------------------ BondConfig --

BondConfig::BondConfig(BoxRegion region, bool fill, double p, std::uint64_t seed,
                       DualLattice lattice)
    : region_(region), lattice_(lattice), p_(p), seed_(seed) {
  if (region.width < 0 || region.height < 0 || region.bond_count() == 0)
    throw std::invalid_argument("BondConfig: region must contain at least one bond");
  horizontal_.assign(static_cast<std::size_t>(region.width * (region.height + 1)), fill ? 1 : 0);
  vertical_.assign(static_cast<std::size_t>(region.height * (region.width + 1)), fill ? 1 : 0);
}

std::size_t BondConfig::slot(const Bond& b) const noexcept {
  const auto x = b.origin.x - region_.lo.x;
  const auto y = b.origin.y - region_.lo.y;
  if (b.axis == Axis::horizontal) return static_cast<std::size_t>(y * region_.width + x);
  return static_cast<std::size_t>(y * (region_.width + 1) + x);
}

bool BondConfig::occupied(const Bond& b) const noexcept {
  if (!region_.contains(b)) return false;
  const auto s = slot(b);
  return (b.axis == Axis::horizontal ? horizontal_[s] : vertical_[s]) != 0;
}

void BondConfig::set(const Bond& b, bool value) {
  if (!region_.contains(b)) throw std::out_of_range("BondConfig::set: bond outside region");
  const auto s = slot(b);
  (b.axis == Axis::horizontal ? horizontal_[s] : vertical_[s]) = value ? 1 : 0;
}

std::size_t BondConfig::occupied_count() const noexcept {
  return static_cast<std::size_t>(std::count(horizontal_.begin(), horizontal_.end(), 1) +
                                  std::count(vertical_.begin(), vertical_.end(), 1));
}

BondConfig sample_bonds(double p, BoxRegion region, std::uint64_t seed, DualLattice lattice) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_bonds: p must lie in [0, 1]");
  BondConfig config(region, false, p, seed, lattice);
  Rng rng(seed);
  config.for_each_bond([&](const Bond& b) {
    if (rng.uniform() < p) config.set(b, true);
  });
  return config;
}

// ------------------------------------------------------------- UnionFind --

UnionFind::UnionFind(std::size_t n) : parent_(n), rank_size_(n, 1) {
  for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
}

std::size_t UnionFind::find(std::size_t i) noexcept {
  while (parent_[i] != i) {
    parent_[i] = parent_[parent_[i]];
    i = parent_[i];
  }
  return i;
}

bool UnionFind::unite(std::size_t a, std::size_t b) noexcept {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (rank_size_[a] < rank_size_[b]) std::swap(a, b);
  parent_[b] = a;
  rank_size_[a] += rank_size_[b];
  return true;
}

namespace {

std::size_t vertex_slot(const BoxRegion& r, Vec2i v) {
  return static_cast<std::size_t>((v.y - r.lo.y) * (r.width + 1) + (v.x - r.lo.x));
}

/// Union-find over the vertices of `box` joined by occupied bonds inside it.
UnionFind occupied_forest(const BondConfig& config, const BoxRegion& box, std::size_t extra) {
  UnionFind uf(box.vertex_count() + extra);
  for (std::int64_t y = 0; y <= box.height; ++y) {
    for (std::int64_t x = 0; x <= box.width; ++x) {
      const Vec2i v{box.lo.x + x, box.lo.y + y};
      if (x < box.width && config.occupied(Bond{v, Axis::horizontal}))
        uf.unite(vertex_slot(box, v), vertex_slot(box, {v.x + 1, v.y}));
      if (y < box.height && config.occupied(Bond{v, Axis::vertical}))
        uf.unite(vertex_slot(box, v), vertex_slot(box, {v.x, v.y + 1}));
    }
  }
  return uf;
}

bool region_covers(const BoxRegion& outer, const BoxRegion& inner) {
  return outer.contains(inner.lo) && outer.contains(inner.hi());
}

}  // namespace

ClusterIndex::ClusterIndex(const BondConfig& config) : region_(config.region()) {
  auto uf = occupied_forest(config, region_, 0);
  const std::size_t n = region_.vertex_count();
  std::vector<std::size_t> smallest(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = smallest[uf.find(i)];
    if (s == n) s = i;
  }
  labels_.resize(n);
  for (std::size_t i = 0; i < n; ++i) labels_[i] = smallest[uf.find(i)];
}

std::size_t ClusterIndex::label(Vec2i vertex) const {
  if (!region_.contains(vertex)) throw std::out_of_range("ClusterIndex: vertex outside region");
  return labels_[vertex_slot(region_, vertex)];
}

// -------------------------------------------------------------- crossing --

Rectangle aspect_rectangle(std::int64_t n, std::int64_t ell, Vec2i lo) {
  if (n < 1 || ell < 0) throw std::invalid_argument("aspect_rectangle: need n >= 1, ell >= 0");
  return Rectangle{lo, n * ell, ell, Axis::horizontal};
}

bool crossing_exists(const BondConfig& config, const Rectangle& rect) {
  if (rect.length < 1 || rect.width < 0)
    throw std::invalid_argument("crossing_exists: rectangle needs length >= 1, width >= 0");
  const BoxRegion box = rect.box();
  if (!region_covers(config.region(), box))
    throw std::out_of_range("crossing_exists: rectangle exceeds the configuration region");
  const std::size_t n = box.vertex_count();
  const std::size_t side_a = n, side_b = n + 1;
  auto uf = occupied_forest(config, box, 2);
  for (std::int64_t k = 0; k <= rect.width; ++k) {
    if (rect.long_axis == Axis::horizontal) {
      uf.unite(side_a, vertex_slot(box, {box.lo.x, box.lo.y + k}));
      uf.unite(side_b, vertex_slot(box, {box.lo.x + rect.length, box.lo.y + k}));
    } else {
      uf.unite(side_a, vertex_slot(box, {box.lo.x + k, box.lo.y}));
      uf.unite(side_b, vertex_slot(box, {box.lo.x + k, box.lo.y + rect.length}));
    }
  }
  return uf.connected(side_a, side_b);
}

bool crossing_exists(const BondConfig& config, std::int64_t n, std::int64_t ell) {
  return crossing_exists(config, aspect_rectangle(n, ell, config.region().lo));
}

CrossingEstimate estimate_crossing_prob(const Rectangle& rect, double p, std::size_t trials,
                                        std::uint64_t seed, unsigned jobs) {
  if (trials < 1) throw std::invalid_argument("estimate_crossing_prob: trials must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("estimate_crossing_prob: p outside [0, 1]");
  std::vector<std::uint8_t> hit(trials, 0);
  parallel_for(trials, jobs, [&](std::size_t t) {
    const auto config = sample_bonds(p, rect.box(), stream_seed(seed, t));
    hit[t] = crossing_exists(config, rect) ? 1 : 0;
  });
  const auto count = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  return CrossingEstimate{rect, p, seed, make_proportion(count, trials)};
}

CrossingEstimate estimate_crossing_prob(std::int64_t n, std::int64_t ell, double p,
                                        std::size_t trials, std::uint64_t seed, unsigned jobs) {
  return estimate_crossing_prob(aspect_rectangle(n, ell), p, trials, seed, jobs);
}

// --------------------------------------------------------------- circuits --

bool Annulus::contains(const Bond& b) const noexcept {
  if (!outer().contains(b)) return false;
  const auto a = lo.x + ell, c = lo.y + ell;
  // A bond meets the open inner box iff its line is strictly inside across
  // the axis and its unit extent lies within the box along it.
  if (b.axis == Axis::horizontal)
    return !(b.origin.y > c && b.origin.y < c + ell && b.origin.x >= a && b.origin.x < a + ell);
  return !(b.origin.x > a && b.origin.x < a + ell && b.origin.y >= c && b.origin.y < c + ell);
}

std::array<Rectangle, 4> Annulus::strips() const noexcept {
  return {Rectangle{lo, 3 * ell, ell, Axis::horizontal},
          Rectangle{{lo.x, lo.y + 2 * ell}, 3 * ell, ell, Axis::horizontal},
          Rectangle{lo, 3 * ell, ell, Axis::vertical},
          Rectangle{{lo.x + 2 * ell, lo.y}, 3 * ell, ell, Axis::vertical}};
}

std::vector<Vec2i> Circuit::midpoints(const DualLattice& lattice) const {
  std::vector<Vec2i> out;
  out.reserve(bonds.size());
  for (const auto& b : bonds) out.push_back(lattice.midpoint(b));
  return out;
}

namespace {

std::optional<Bond> bond_between(Vec2i a, Vec2i b) {
  const Vec2i d = b - a;
  if (d == Vec2i{1, 0}) return Bond{a, Axis::horizontal};
  if (d == Vec2i{-1, 0}) return Bond{b, Axis::horizontal};
  if (d == Vec2i{0, 1}) return Bond{a, Axis::vertical};
  if (d == Vec2i{0, -1}) return Bond{b, Axis::vertical};
  return std::nullopt;
}

}  // namespace

CircuitCheck check_circuit(const Circuit& circuit, const BondConfig& config) {
  CircuitCheck check;
  const auto& v = circuit.vertices;
  const std::size_t k = v.size();
  if (k < 4 || circuit.bonds.size() != k) return check;
  check.closed = true;
  check.contained = true;
  check.occupied = true;
  double turning = 0.0;
  const Vec2 c = circuit.annulus.center();
  for (std::size_t i = 0; i < k; ++i) {
    const Vec2i a = v[i], b = v[(i + 1) % k];
    const auto bond = bond_between(a, b);
    if (!bond || !(*bond == circuit.bonds[i])) check.closed = false;
    if (!circuit.annulus.contains(circuit.bonds[i])) check.contained = false;
    if (!config.occupied(circuit.bonds[i])) check.occupied = false;
    const double t0 = std::atan2(static_cast<double>(a.y) - c.y, static_cast<double>(a.x) - c.x);
    const double t1 = std::atan2(static_cast<double>(b.y) - c.y, static_cast<double>(b.x) - c.x);
    double dt = t1 - t0;
    while (dt > std::numbers::pi) dt -= 2.0 * std::numbers::pi;
    while (dt < -std::numbers::pi) dt += 2.0 * std::numbers::pi;
    turning += dt;
  }
  check.winding = std::llround(turning / (2.0 * std::numbers::pi));
  return check;
}

std::optional<Circuit> find_closed_circuit(const BondConfig& config, const Annulus& annulus) {
  if (annulus.ell < 1) throw std::invalid_argument("find_closed_circuit: ell must be >= 1");
  if (!region_covers(config.region(), annulus.outer()))
    throw std::out_of_range("find_closed_circuit: annulus exceeds the configuration region");
  const std::int64_t side = 3 * annulus.ell;
  const Vec2i lo = annulus.lo;
  const auto cell = [side](std::int64_t fx, std::int64_t fy) {
    return static_cast<std::size_t>(fy * side + fx);
  };
  const auto in_hole = [&](std::int64_t fx, std::int64_t fy) {
    return fx >= annulus.ell && fx < 2 * annulus.ell && fy >= annulus.ell && fy < 2 * annulus.ell;
  };
  // Bond separating cell (fx, fy) from its neighbour in direction d.
  constexpr std::array<Vec2i, 4> steps{Vec2i{1, 0}, Vec2i{-1, 0}, Vec2i{0, 1}, Vec2i{0, -1}};
  const auto separating = [&](std::int64_t fx, std::int64_t fy, int d) {
    const Vec2i o{lo.x + fx, lo.y + fy};
    switch (d) {
      case 0: return Bond{{o.x + 1, o.y}, Axis::vertical};
      case 1: return Bond{o, Axis::vertical};
      case 2: return Bond{{o.x, o.y + 1}, Axis::horizontal};
      default: return Bond{o, Axis::horizontal};
    }
  };

  // Dual search from the hole across empty bonds.
  std::vector<std::uint8_t> region(static_cast<std::size_t>(side * side), 0);
  std::vector<Vec2i> queue;
  for (std::int64_t fy = 0; fy < side; ++fy)
    for (std::int64_t fx = 0; fx < side; ++fx)
      if (in_hole(fx, fy)) {
        region[cell(fx, fy)] = 1;
        queue.push_back({fx, fy});
      }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Vec2i f = queue[head];
    for (int d = 0; d < 4; ++d) {
      const Vec2i g = f + steps[static_cast<std::size_t>(d)];
      const bool outside = g.x < 0 || g.y < 0 || g.x >= side || g.y >= side;
      if (!outside && region[cell(g.x, g.y)]) continue;
      if (config.occupied(separating(f.x, f.y, d))) continue;
      if (outside) return std::nullopt;
      region[cell(g.x, g.y)] = 1;
      queue.push_back(g);
    }
  }

  // Fill pockets of the complement that cannot reach the exterior through
  // 8-connected complement cells; these lie inside every enclosing circuit.
  std::vector<std::uint8_t> outside(region.size(), 0);
  queue.clear();
  for (std::int64_t fy = 0; fy < side; ++fy)
    for (std::int64_t fx = 0; fx < side; ++fx)
      if ((fx == 0 || fy == 0 || fx == side - 1 || fy == side - 1) && !region[cell(fx, fy)]) {
        outside[cell(fx, fy)] = 1;
        queue.push_back({fx, fy});
      }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Vec2i f = queue[head];
    for (std::int64_t dy = -1; dy <= 1; ++dy)
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        const Vec2i g{f.x + dx, f.y + dy};
        if (g.x < 0 || g.y < 0 || g.x >= side || g.y >= side) continue;
        const auto c = cell(g.x, g.y);
        if (region[c] || outside[c]) continue;
        outside[c] = 1;
        queue.push_back(g);
      }
  }
  const auto filled = [&](std::int64_t fx, std::int64_t fy) {
    if (fx < 0 || fy < 0 || fx >= side || fy >= side) return false;
    return !outside[cell(fx, fy)];
  };

  // Boundary edges, oriented with the filled region on the left.
  std::map<Vec2i, std::vector<Vec2i>> out_edges;
  std::size_t edge_count = 0;
  for (std::int64_t fy = 0; fy < side; ++fy)
    for (std::int64_t fx = 0; fx < side; ++fx) {
      if (!filled(fx, fy)) continue;
      const Vec2i o{lo.x + fx, lo.y + fy};
      const Vec2i c00 = o, c10{o.x + 1, o.y}, c11{o.x + 1, o.y + 1}, c01{o.x, o.y + 1};
      if (!filled(fx, fy - 1)) out_edges[c00].push_back(c10), ++edge_count;
      if (!filled(fx + 1, fy)) out_edges[c10].push_back(c11), ++edge_count;
      if (!filled(fx, fy + 1)) out_edges[c11].push_back(c01), ++edge_count;
      if (!filled(fx - 1, fy)) out_edges[c01].push_back(c00), ++edge_count;
    }

  // Hierholzer: one closed walk through every boundary edge.
  std::map<Vec2i, std::size_t> next;
  std::vector<Vec2i> stack{out_edges.begin()->first};
  std::vector<Vec2i> walk;
  while (!stack.empty()) {
    const Vec2i v = stack.back();
    auto& used = next[v];
    const auto& outs = out_edges[v];
    if (used < outs.size()) {
      stack.push_back(outs[used++]);
    } else {
      walk.push_back(v);
      stack.pop_back();
    }
  }
  std::reverse(walk.begin(), walk.end());
  walk.pop_back();  // closing repeat of the start vertex
  if (walk.size() != edge_count)
    throw std::logic_error("find_closed_circuit: boundary is not a single closed walk");

  Circuit circuit;
  circuit.annulus = annulus;
  circuit.vertices = std::move(walk);
  circuit.bonds.reserve(circuit.vertices.size());
  for (std::size_t i = 0; i < circuit.vertices.size(); ++i)
    circuit.bonds.push_back(
        *bond_between(circuit.vertices[i], circuit.vertices[(i + 1) % circuit.vertices.size()]));
  return circuit;
}

std::optional<Circuit> find_closed_circuit(const BondConfig& config, std::int64_t ell) {
  return find_closed_circuit(config, Annulus{config.region().lo, ell});
}

bool four_strip_crossings(const BondConfig& config, const Annulus& annulus) {
  for (const auto& r : annulus.strips())
    if (!crossing_exists(config, r)) return false;
  return true;
}

CircuitEstimate estimate_circuit_prob(std::int64_t ell, double p, std::size_t trials,
                                      std::uint64_t seed, unsigned jobs) {
  if (trials < 1) throw std::invalid_argument("estimate_circuit_prob: trials must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("estimate_circuit_prob: p outside [0, 1]");
  const Annulus annulus{{0, 0}, ell};
  std::vector<std::uint8_t> hit(trials, 0);
  parallel_for(trials, jobs, [&](std::size_t t) {
    const auto config = sample_bonds(p, annulus.outer(), stream_seed(seed, t));
    hit[t] = find_closed_circuit(config, annulus).has_value() ? 1 : 0;
  });
  const auto count = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  return CircuitEstimate{ell, p, seed, make_proportion(count, trials)};
}

// ----------------------------------------------------------- connectivity --

ConnectivityFit fit_connectivity_decay(double q, std::span<const std::int64_t> distances,
                                       std::size_t trials, std::uint64_t seed, unsigned jobs) {
  if (!(q >= 0.0 && q < 0.5))
    throw std::invalid_argument("fit_connectivity_decay: q must satisfy 0 <= q < 1/2");
  if (distances.empty()) throw std::invalid_argument("fit_connectivity_decay: no distances");
  if (trials < 1) throw std::invalid_argument("fit_connectivity_decay: trials must be >= 1");
  for (auto d : distances)
    if (d < 1) throw std::invalid_argument("fit_connectivity_decay: distances must be >= 1");
  const std::int64_t reach = *std::max_element(distances.begin(), distances.end()) + 8;
  const BoxRegion box{{-reach, -reach}, 2 * reach, 2 * reach};

  const std::size_t nd = distances.size();
  std::vector<std::uint8_t> hits(trials * nd, 0);
  parallel_for(trials, jobs, [&](std::size_t t) {
    const auto config = sample_bonds(q, box, stream_seed(seed, t));
    const ClusterIndex clusters(config);
    for (std::size_t k = 0; k < nd; ++k)
      hits[t * nd + k] = clusters.connected({0, 0}, {distances[k], 0}) ? 1 : 0;
  });

  ConnectivityFit out;
  out.q = q;
  out.distances.assign(distances.begin(), distances.end());
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < nd; ++k) {
    std::size_t c = 0;
    for (std::size_t t = 0; t < trials; ++t) c += hits[t * nd + k];
    out.connection.push_back(make_proportion(c, trials));
    if (c > 0) {
      xs.push_back(static_cast<double>(distances[k]));
      ys.push_back(-std::log(out.connection.back().estimate));
    }
  }
  if (xs.size() >= 2) {
    out.fit = linear_fit(xs, ys);
    out.rate = out.fit->slope;
  } else if (xs.size() == 1) {
    out.rate = ys[0] / xs[0];
  }
  return out;
}

}  // namespace landloc::percolation
