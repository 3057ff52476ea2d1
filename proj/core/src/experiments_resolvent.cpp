#include <cmath>
#include <stdexcept>

#include "experiments_common.hpp"
#include "landloc/cutoff.hpp"
#include "landloc/experiments.hpp"
#include "landloc/hamiltonian.hpp"
#include "landloc/parallel.hpp"
#include "landloc/percolation.hpp"
#include "landloc/potential.hpp"

namespace landloc::experiments {

using detail::fmt;
namespace ham = hamiltonian;
namespace pot = potential;

namespace {

ham::SparseMatrix diagonal(const Eigen::VectorXd& w) {
  ham::SparseMatrix D(w.size(), w.size());
  std::vector<Eigen::Triplet<ham::cplx>> tr;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w[i] != 0.0) tr.emplace_back(i, i, w[i]);
  D.setFromTriplets(tr.begin(), tr.end());
  return D;
}

Eigen::VectorXd box_indicator(const Grid& g, double half, bool inside) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(g.size()));
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec2 x = g.point(k) - g.center();
    const bool in = std::max(std::abs(x.x), std::abs(x.y)) <= half + 1e-12;
    w[static_cast<Eigen::Index>(k)] = in == inside ? 1.0 : 0.0;
  }
  return w;
}

}  // namespace

// ----------------------------------------------------------------- decay --

ExperimentReport decay(const DecayParams& p, const Context& ctx) {
  ExperimentReport rep;
  const auto bump = pot::SingleSiteBump::with_radius(p.r_u);
  pot::CouplingSpec spec;
  spec.M = p.M;
  const auto T = static_cast<std::size_t>(p.trials);
  const std::size_t D = p.separations.size();
  for (double a : p.as)
    if (!(a > 0.0)) throw std::invalid_argument("decay: a = 0 is excluded");
  if (0.5 * p.core + p.separations.back() >= 0.5 * p.side)
    throw std::invalid_argument("decay: largest separation leaves no exterior region");

  struct Point {
    double B, a;
  };
  std::vector<Point> pts;
  for (double B : p.Bs)
    for (double a : p.as) pts.push_back({B, a});

  // norms[point][trial][separation]
  std::vector<std::vector<std::vector<double>>> norms(pts.size(), std::vector<std::vector<double>>(T));
  std::vector<std::vector<double>> vmin(pts.size(), std::vector<double>(T));
  const std::size_t tasks = pts.size() * T;
  parallel_for(tasks, ctx.jobs, [&](std::size_t task) {
    const std::size_t k = task / T, t = task % T;
    const double B = pts[k].B, a = pts[k].a;
    const double h = grid_spacing(p.side, B, p.flux);
    const Grid g({0.0, 0.0}, p.side, h);
    const double E0 = discrete_landau_energy(B, h);
    const double E = E0 - 2.0 * a;
    const std::uint64_t seed = stream_seed(ctx.seed, detail::key(k, t));
    // Occupied side below the level: lambda > (E - E0)/2 = -a, hence V >= -a.
    const auto sample = pot::sample_occupied_couplings(spec, detail::covering_sites(g, p.r_u + p.mollifier),
                                                       E, E0, seed, bump);
    Eigen::VectorXd V;
    if (p.mollifier > 0.0) {
      const pot::MollifiedPotential Vm(sample, p.mollifier);
      V = ham::sample_on_grid(g, [&](Vec2 x) { return Vm(x); });
    } else {
      V = ham::sample_on_grid(g, [&](Vec2 x) { return sample(x); });
    }
    vmin[k][t] = V.minCoeff() + a;
    const ham::HamiltonianMatrix H(g, B, V);
    const ham::ResolventSolver R(H.matrix(), ham::cplx(E, p.eps));
    const Eigen::VectorXd core = box_indicator(g, 0.5 * p.core, true);
    ham::NormOptions o;
    o.seed = seed;
    o.tolerance = 1e-6;
    std::vector<double> out(D);
    for (std::size_t j = 0; j < D; ++j) {
      const auto left = diagonal(box_indicator(g, 0.5 * p.core + p.separations[j], false));
      out[j] = ham::resolvent_block_norm(R, left, core, o).value;
    }
    norms[k][t] = std::move(out);
  });

  auto& s = rep.add_series("norms", {"B", "a", "E", "trial", "separation", "norm"});
  auto& f = rep.add_series("rates", {"B", "a", "gamma", "ci_low", "ci_high", "points", "shape", "accepted"});
  std::vector<double> gam(pts.size(), NAN), shape(pts.size());
  bool all_positive = true, condition_ok = true;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double B = pts[k].B, a = pts[k].a;
    const double E = discrete_landau_energy(B, grid_spacing(p.side, B, p.flux)) - 2.0 * a;
    std::vector<double> xs, ys;
    std::vector<std::uint8_t> above(D, 0);
    for (std::size_t t = 0; t < T; ++t) {
      condition_ok = condition_ok && vmin[k][t] >= -1e-12;
      for (std::size_t j = 0; j < D; ++j) {
        const double n = norms[k][t][j];
        s.add({B, a, E, double(t), p.separations[j], n});
        if (n > p.noise_floor / a) {
          xs.push_back(p.separations[j]);
          ys.push_back(std::log(n));
          above[j] = 1;
        }
      }
    }
    std::size_t distinct = 0;
    for (auto u : above) distinct += u;
    shape[k] = std::min(std::sqrt(B), a * B);
    const bool accepted = distinct >= 4;
    Interval ci{NAN, NAN};
    if (accepted) {
      gam[k] = -linear_fit(xs, ys).slope;
      const auto c = bootstrap_slope(xs, ys, kBootstrap, stream_seed(ctx.seed, detail::key(1000 + k, 0)));
      ci = {-c.high, -c.low};
    }
    all_positive = all_positive && accepted && gam[k] > 0.0;
    f.add({B, a, gam[k], ci.low, ci.high, double(distinct), shape[k], accepted ? 1.0 : 0.0});
  }
  rep.add_check("potential_condition", condition_ok, 0.0, "V >= -a on every grid site (mollified)");
  rep.add_check("gamma_positive", all_positive, 0.0,
                "every (B, a) fit accepted (>= 4 separations above the noise floor) with gamma > 0");

  // Monotone in B at the smallest a.
  const double amin = *std::min_element(p.as.begin(), p.as.end());
  std::vector<std::pair<double, double>> byB;
  for (std::size_t k = 0; k < pts.size(); ++k)
    if (pts[k].a == amin) byB.push_back({pts[k].B, gam[k]});
  std::sort(byB.begin(), byB.end());
  bool mono = true;
  for (std::size_t i = 1; i < byB.size(); ++i) mono = mono && byB[i].second >= byB[i - 1].second;
  rep.add_check("gamma_nondecreasing_in_B", mono, amin, "at a = " + fmt(amin));

  // gamma ~ c0 + c1 min(sqrt B, aB).
  std::vector<double> gx, gy;
  for (std::size_t k = 0; k < pts.size(); ++k)
    if (std::isfinite(gam[k])) gx.push_back(shape[k]), gy.push_back(gam[k]);
  const double corr = detail::safe_correlation(gx, gy);
  if (gx.size() >= 2) {
    const auto lf = linear_fit(gx, gy);
    const auto ci = bootstrap_slope(gx, gy, kBootstrap, stream_seed(ctx.seed, 7));
    rep.add_fit({"shape_slope", lf.slope, ci.low, ci.high, kBootstrap, "gamma = c0 + c1 min(sqrt B, a B): c1"});
    rep.add_fit({"shape_intercept", lf.intercept, lf.intercept, lf.intercept, 0, "c0"});
    const auto cc = detail::bootstrap(gx.size(), kBootstrap, stream_seed(ctx.seed, 8), [&](const auto& idx) {
      std::vector<double> a, b;
      for (auto i : idx) a.push_back(gx[i]), b.push_back(gy[i]);
      return detail::safe_correlation(a, b);
    });
    rep.add_fit({"shape_correlation", corr, cc.low, cc.high, kBootstrap, "Pearson(gamma, min(sqrt B, a B))"});
  }
  rep.add_check("shape_correlation", std::isfinite(corr) && corr >= p.min_correlation, corr,
                ">= " + fmt(p.min_correlation));
  return rep;
}

// -------------------------------------------------------------------- h1 --

ExperimentReport h1(const H1Params& p, const Context& ctx) {
  ExperimentReport rep;
  const Grid g({0.0, 0.0}, p.ell0, p.h);
  const double E0 = discrete_landau_energy(p.B, p.h);
  const double a = p.a_scale * std::pow(p.B, p.sigma - 1.0);
  const std::vector<double> energies{E0 - 2.0 * a, E0};
  const auto bump = pot::SingleSiteBump::with_radius(p.r_u);
  pot::CouplingSpec spec;
  spec.M = p.M;
  const auto sites = detail::covering_sites(g, p.r_u);
  const auto T = static_cast<std::size_t>(p.trials);

  const auto chi = ham::weights_on_grid(g, BoxCutoff::square({0.0, 0.0}, p.ell0, p.delta));
  const Eigen::VectorXd core = box_indicator(g, p.ell0 / 6.0, true);
  const double threshold = std::exp(-p.gamma0 * p.ell0);

  std::vector<std::array<double, 2>> norms(T);
  parallel_for(T, ctx.jobs, [&](std::size_t t) {
    const std::uint64_t seed = stream_seed(ctx.seed, t);
    const auto V = pot::sample_couplings(spec, sites, seed, bump);
    const auto H = ham::assemble(p.B, V, g);
    const auto W = ham::commutator(chi, H.matrix());
    ham::NormOptions o;
    o.seed = seed;
    o.max_iterations = 40;
    o.tolerance = 1e-3;
    for (std::size_t e = 0; e < 2; ++e) {
      const ham::ResolventSolver R(H.matrix(), ham::cplx(energies[e], p.eps));
      norms[t][e] = ham::resolvent_block_norm(R, W, core, o).value;
    }
  });

  auto& s = rep.add_series("events", {"E", "label", "trials", "events", "frequency", "ci_low", "ci_high",
                                      "gamma0_star", "median_norm"});
  const double q = 1.0 - std::pow(p.ell0, -p.xi);
  double freq[2];
  for (std::size_t e = 0; e < 2; ++e) {
    std::vector<double> v;
    std::size_t hits = 0;
    for (const auto& n : norms) {
      v.push_back(n[e]);
      hits += n[e] <= threshold;
    }
    rep.samples[e == 0 ? "norm_band_edge" : "norm_landau_level"] = v;
    std::sort(v.begin(), v.end());
    // Smallest count meeting the frequency target, and the gamma0 it allows.
    const auto need = static_cast<std::size_t>(std::ceil(q * static_cast<double>(T)));
    const double nq = v[std::min(need, T) - 1];
    const double gstar = nq > 0 ? -std::log(nq) / p.ell0 : INFINITY;
    const auto pr = make_proportion(hits, T);
    freq[e] = pr.estimate;
    s.add({energies[e], double(e), double(T), double(hits), pr.estimate, pr.ci.low, pr.ci.high, gstar, v[T / 2]});
    rep.add_fit({e == 0 ? "gamma0_star_band_edge" : "gamma0_star_landau_level", gstar, gstar, gstar, 0,
                 "largest gamma0 with frequency >= 1 - ell0^-xi"});
  }
  const double diff = freq[0] - freq[1];
  const auto ci = detail::bootstrap(T, kBootstrap, stream_seed(ctx.seed, 1u << 30), [&](const auto& idx) {
    double d = 0;
    for (auto i : idx) d += (norms[i][0] <= threshold) - (norms[i][1] <= threshold);
    return d / static_cast<double>(idx.size());
  });
  rep.add_fit({"frequency_difference", diff, ci.low, ci.high, kBootstrap, "band edge minus Landau level"});
  rep.add_check("band_edge_beats_landau_level", diff >= p.min_difference, diff,
                "frequency difference >= " + fmt(p.min_difference));
  rep.add_check("band_edge_frequency", freq[0] >= 0.9, freq[0], "event frequency >= 0.9 at the band-edge energy");

  // Percolation side: occupation probability and circuit frequency in the
  // largest annulus whose physical extent fits inside the box.
  auto& x = rep.add_series("percolation", {"E", "p_occupied", "ell", "circuit", "ci_low", "ci_high", "event_frequency"});
  const auto ell_c = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor((p.ell0 - 2.0 * p.delta) / 6.0)));
  for (std::size_t e = 0; e < 2; ++e) {
    const double po = pot::occupied_probability(spec, energies[e], E0);
    const auto A = percolation::estimate_circuit_prob(ell_c, po, static_cast<std::size_t>(p.circuit_trials),
                                                      stream_seed(ctx.seed, (1u << 31) + e), ctx.jobs);
    x.add({energies[e], po, double(ell_c), A.circuit.estimate, A.circuit.ci.low, A.circuit.ci.high, freq[e]});
  }
  return rep;
}

}  // namespace landloc::experiments
