#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "experiments_common.hpp"
#include "landloc/experiments.hpp"
#include "landloc/hamiltonian.hpp"
#include "landloc/parallel.hpp"
#include "landloc/potential.hpp"

namespace landloc::experiments {

using detail::fmt;
namespace ham = hamiltonian;
namespace pot = potential;

namespace {

// Couplings drawn on `random`, zero elsewhere in `all`.
pot::PotentialSample restricted_sample(const pot::CouplingSpec& spec, const pot::SiteBox& all,
                                       const pot::SiteBox& random, std::uint64_t seed,
                                       const pot::SingleSiteBump& bump) {
  auto s = pot::sample_couplings(spec, all, seed, bump);
  for (auto y = all.lo.y; y <= all.hi.y; ++y)
    for (auto x = all.lo.x; x <= all.hi.x; ++x)
      if (!random.contains({x, y})) s.set_coupling({x, y}, 0.0);
  return s;
}

// 1 - sigma_min(X^* Y)^2 = ||E Q0 E|| for orthonormal bases X of P0, Y of E.
double projected_norm(const Eigen::MatrixXcd& X, const Eigen::MatrixXcd& Y) {
  const Eigen::MatrixXcd C = X.adjoint() * Y;
  Eigen::JacobiSVD<Eigen::MatrixXcd> sv(C);
  const double s = sv.singularValues().minCoeff();
  return std::max(0.0, 1.0 - s * s);
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

// ---------------------------------------------------------------- wegner --

ExperimentReport wegner(const WegnerParams& p, const Context& ctx) {
  ExperimentReport rep;
  const double E0 = discrete_landau_energy(p.B, p.h);
  const double dist = std::min(std::abs(p.E - E0), std::abs(p.E - 3.0 * E0));
  if (dist < 4.0 / p.B)
    throw std::invalid_argument("wegner: E must stay off the Landau energies (E0 = " + fmt(E0) + ")");
  const auto bump = pot::SingleSiteBump::with_radius(p.r_u);
  pot::CouplingSpec spec;
  spec.M = p.M;
  const auto T = static_cast<std::size_t>(p.trials);
  const std::size_t S = p.sides.size();

  std::vector<std::vector<double>> d(S, std::vector<double>(T));
  for (std::size_t k = 0; k < S; ++k) {
    const auto side = p.sides[k];
    const double c = 0.5 * static_cast<double>(side - 1);
    const Grid g({c, c}, static_cast<double>(side) + 2.0 * p.collar, p.h);
    const pot::SiteBox random{{0, 0}, {side - 1, side - 1}};
    const auto all = detail::covering_sites(g, p.r_u);
    parallel_for(T, ctx.jobs, [&](std::size_t t) {
      const std::uint64_t seed = stream_seed(ctx.seed, detail::key(k, t));
      const auto V = restricted_sample(spec, all, random, seed, bump);
      const auto H = ham::assemble(p.B, V, g);
      d[k][t] = ham::spectral_distance(H.matrix(), p.E, seed);
    });
    rep.samples["distance_side" + std::to_string(side)] = d[k];
  }

  const double g_inf = spec.sup_density();
  auto& s = rep.add_series("probability", {"side", "volume", "delta", "trials", "hits", "estimate",
                                           "ci_low", "ci_high", "wegner_ratio"});
  // hits[k][i] for resampled index sets.
  auto count = [&](std::size_t k, double delta, const std::vector<std::size_t>* idx) {
    std::size_t h = 0;
    if (idx)
      for (auto i : *idx) h += d[k][i] < delta;
    else
      for (double x : d[k]) h += x < delta;
    return h;
  };
  auto fit = [&](const std::vector<std::vector<std::size_t>>* idx) {
    std::vector<std::vector<double>> X;
    std::vector<double> y, w;
    for (std::size_t k = 0; k < std::min<std::size_t>(S, 2); ++k)
      for (double delta : p.deltas) {
        const auto h = count(k, delta, idx ? &(*idx)[k] : nullptr);
        if (h == 0 || h == T || delta <= 0) continue;
        const double pr = static_cast<double>(h) / T;
        std::vector<double> row{std::log(delta), k == 0 ? 1.0 : 0.0, k == 1 ? 1.0 : 0.0};
        X.push_back(row);
        y.push_back(std::log(pr));
        w.push_back(static_cast<double>(h) / (1.0 - pr));
      }
    return detail::weighted_lsq(X, y, w);
  };

  double cw = 0;
  bool monotone_volume = true;
  for (std::size_t k = 0; k < S; ++k) {
    const double vol = static_cast<double>(p.sides[k] * p.sides[k]);
    for (double delta : p.deltas) {
      const auto h = count(k, delta, nullptr);
      const auto pr = make_proportion(h, T);
      const double bound = g_inf * delta * p.B * vol / (dist * dist);
      const double ratio = bound > 0 ? pr.estimate / bound : 0.0;
      cw = std::max(cw, ratio);
      s.add({double(p.sides[k]), vol, delta, double(T), double(h), pr.estimate, pr.ci.low, pr.ci.high, ratio});
      if (k > 0) {
        const auto prev = make_proportion(count(k - 1, delta, nullptr), T);
        monotone_volume = monotone_volume &&
                          pr.estimate >= prev.estimate - 2.0 * std::hypot(pr.standard_error(), prev.standard_error());
      }
    }
  }
  rep.add_check("monotone_in_volume", monotone_volume, 0.0,
                "P(delta) at the larger box >= smaller box - 2 pooled SE");
  rep.add_fit({"C_W", cw, cw, cw, 0,
               "max over points of P / (dist^-2 ||g||_inf delta B |Lambda|), dist = " + fmt(dist)});

  if (S >= 2) {
    const auto beta = fit(nullptr);
    const double slope = beta[0];
    const double ratio = std::exp(beta[2] - beta[1]);
    std::vector<double> bs, br;
    Rng rng(stream_seed(ctx.seed, 1u << 20));
    for (std::size_t b = 0; b < kBootstrap; ++b) {
      std::vector<std::vector<std::size_t>> idx(S, std::vector<std::size_t>(T));
      for (auto& v : idx)
        for (auto& i : v) i = rng.below(T);
      const auto bb = fit(&idx);
      if (std::isfinite(bb[0])) {
        bs.push_back(bb[0]);
        br.push_back(std::exp(bb[2] - bb[1]));
      }
    }
    const double vr = static_cast<double>(p.sides[1] * p.sides[1]) / static_cast<double>(p.sides[0] * p.sides[0]);
    rep.add_fit({"delta_slope", slope, percentile(bs, 0.025), percentile(bs, 0.975), bs.size(),
                 "common log-log slope in delta, weighted by hit counts"});
    rep.add_fit({"volume_ratio", ratio, percentile(br, 0.025), percentile(br, 0.975), br.size(),
                 "P(side " + std::to_string(p.sides[1]) + ") / P(side " + std::to_string(p.sides[0]) +
                     "), volume ratio " + fmt(vr)});
    rep.add_check("delta_slope", std::abs(slope - p.slope_target) <= p.slope_tol, slope,
                  "|slope - " + fmt(p.slope_target) + "| <= " + fmt(p.slope_tol));
    rep.add_check("volume_ratio", std::abs(ratio - p.ratio_target) <= p.ratio_tol, ratio,
                  "|ratio - " + fmt(p.ratio_target) + "| <= " + fmt(p.ratio_tol));
  }
  return rep;
}

// ------------------------------------------------------------------- ids --

ExperimentReport ids(const IdsParams& p, const Context& ctx) {
  ExperimentReport rep;
  const double h = grid_spacing(p.side, p.B, p.flux);
  const Grid g({0.0, 0.0}, p.side, h);
  const double area = g.area();
  const double E0 = discrete_landau_energy(p.B, h);
  const double deg = p.B / (2.0 * std::numbers::pi);

  // Free operator: steps between the gap midpoints 2nB.
  {
    const auto H0 = ham::assemble_free(p.B, g);
    ham::InertiaCounter ic(H0.matrix());
    auto& s = rep.add_series("free_steps", {"level", "E_lo", "E_hi", "step_per_area", "degeneracy", "relative_error"});
    double worst = 0;
    double prev = 0;  // nothing below 0
    for (int n = 0; n < 2; ++n) {
      const double Ehi = 2.0 * (n + 1) * p.B;
      const double N = static_cast<double>(ic.count_below(Ehi)) / area;
      const double step = N - prev;
      const double err = std::abs(step - deg) / deg;
      worst = std::max(worst, err);
      s.add({double(n), 2.0 * n * p.B, Ehi, step, deg, err});
      prev = N;
    }
    rep.add_check("free_step_heights", worst <= p.step_tol, worst,
                  "steps of N between gap midpoints within " + fmt(p.step_tol) + " of B/2pi");
  }

  std::vector<double> energies;
  for (double e = E0 - p.energy_span; e <= E0 + p.energy_span + 1e-12; e += p.energy_step) energies.push_back(e);
  const auto T = static_cast<std::size_t>(p.trials);
  const std::size_t W = p.windows.size();
  pot::CouplingSpec spec;
  spec.M = p.M;
  auto& curve = rep.add_series("ids", {"covering", "E", "N", "ci_low", "ci_high"});
  auto& mod = rep.add_series("modulus", {"covering", "window", "modulus", "ci_low", "ci_high"});
  double growth[2] = {0, 0};
  bool zero_below = true;
  double agree_frac = 1.0;

  for (int cov = 0; cov < 2; ++cov) {
    const auto bump = cov ? pot::SingleSiteBump::covering() : pot::SingleSiteBump::with_radius(0.35);
    const auto sites = detail::covering_sites(g, bump.r_u);
    // counts[t] = energies then E0 -/+ w pairs
    std::vector<std::vector<double>> counts(T);
    parallel_for(T, ctx.jobs, [&](std::size_t t) {
      const auto V = pot::sample_couplings(spec, sites, stream_seed(ctx.seed, detail::key(cov, t)), bump);
      const auto H = ham::assemble(p.B, V, g);
      ham::InertiaCounter ic(H.matrix());
      std::vector<double> c;
      c.reserve(energies.size() + 2 * W + 1);
      for (double e : energies) c.push_back(static_cast<double>(ic.count_below(e)));
      for (double w : p.windows) {
        c.push_back(static_cast<double>(ic.count_below(E0 - w)));
        c.push_back(static_cast<double>(ic.count_below(E0 + w)));
      }
      c.push_back(static_cast<double>(ic.count_below(H.spectral_bounds().first - 1.0)));
      counts[t] = std::move(c);
    });

    auto mean_col = [&](std::size_t j, const std::vector<std::size_t>& idx) {
      double s = 0;
      for (auto i : idx) s += counts[i][j];
      return s / static_cast<double>(idx.size()) / area;
    };
    std::vector<std::size_t> all(T);
    for (std::size_t i = 0; i < T; ++i) all[i] = i;
    for (std::size_t j = 0; j < energies.size(); ++j) {
      const auto ci = detail::bootstrap(T, 200, stream_seed(ctx.seed, detail::key(10 + cov, j)),
                                        [&](const auto& idx) { return mean_col(j, idx); });
      curve.add({double(cov), energies[j], mean_col(j, all), ci.low, ci.high});
    }
    for (const auto& c : counts) zero_below = zero_below && c.back() == 0.0;

    // Two independent halves agree within the pooled 95% interval.
    std::vector<std::size_t> first(all.begin(), all.begin() + T / 2), second(all.begin() + T / 2, all.end());
    std::size_t agree = 0;
    for (std::size_t j = 0; j < energies.size(); ++j) {
      auto se = [&](const std::vector<std::size_t>& idx) {
        std::vector<double> v;
        for (auto i : idx) v.push_back(counts[i][j] / area);
        return std::sqrt(variance(v) / static_cast<double>(v.size()));
      };
      const double diff = std::abs(mean_col(j, first) - mean_col(j, second));
      agree += diff <= kZ95 * std::hypot(se(first), se(second)) + 1e-15;
    }
    agree_frac = std::min(agree_frac, static_cast<double>(agree) / static_cast<double>(energies.size()));

    auto modulus = [&](std::size_t wi, const std::vector<std::size_t>& idx) {
      const std::size_t j = energies.size() + 2 * wi;
      return (mean_col(j + 1, idx) - mean_col(j, idx)) / (2.0 * p.windows[wi]);
    };
    std::size_t wmax = 0, wmin = 0;
    for (std::size_t wi = 0; wi < W; ++wi) {
      if (p.windows[wi] > p.windows[wmax]) wmax = wi;
      if (p.windows[wi] < p.windows[wmin]) wmin = wi;
      const auto ci = detail::bootstrap(T, kBootstrap, stream_seed(ctx.seed, detail::key(20 + cov, wi)),
                                        [&](const auto& idx) { return modulus(wi, idx); });
      mod.add({double(cov), p.windows[wi], modulus(wi, all), ci.low, ci.high});
    }
    auto gr = [&](const std::vector<std::size_t>& idx) { return modulus(wmin, idx) / modulus(wmax, idx); };
    growth[cov] = gr(all);
    const auto gci = detail::bootstrap(T, kBootstrap, stream_seed(ctx.seed, detail::key(30 + cov, 0)), gr);
    rep.add_fit({cov ? "growth_covering" : "growth_noncovering", growth[cov], gci.low, gci.high, kBootstrap,
                 "modulus at window " + fmt(p.windows[wmin]) + " over modulus at " + fmt(p.windows[wmax]) +
                     " about E0 = " + fmt(E0)});

    // Lipschitz modulus of N away from (E0 - c/B, E0 + c/B).
    double lip = 0;
    const double ex = p.exclusion_c / p.B;
    for (std::size_t j = 0; j + 1 < energies.size(); ++j) {
      if (energies[j + 1] > E0 - ex && energies[j] < E0 + ex) continue;
      lip = std::max(lip, (mean_col(j + 1, all) - mean_col(j, all)) / p.energy_step);
    }
    rep.add_fit({cov ? "lipschitz_covering" : "lipschitz_noncovering", lip, lip, lip, 0,
                 "max finite-difference slope of N outside E0 +- " + fmt(p.exclusion_c) + "/B"});
  }
  rep.add_check("noncovering_modulus_grows", growth[0] >= p.growth_threshold, growth[0],
                "non-covering modulus grows by >= " + fmt(p.growth_threshold) + "x under refinement");
  rep.add_check("covering_modulus_bounded", growth[1] < p.growth_threshold, growth[1],
                "covering modulus grows by < " + fmt(p.growth_threshold) + "x under refinement");
  rep.add_check("halves_agree", agree_frac >= 0.9, agree_frac, "two disorder batches agree within pooled 95% CI at >= 90% of energies");
  rep.add_check("zero_below_spectrum", zero_below, 0.0, "N = 0 below the Gershgorin bound");
  return rep;
}

// ------------------------------------------------------- band projection --

ExperimentReport band_projection(const BandParams& p, const Context& ctx) {
  ExperimentReport rep;
  const auto bump = pot::SingleSiteBump::with_radius(p.r_u);
  pot::CouplingSpec spec;
  spec.M = p.M;
  const auto T = static_cast<std::size_t>(p.trials);
  auto& s = rep.add_series("band", {"B", "h", "E0", "trial", "states", "norm", "trace_ratio"});
  std::vector<std::vector<double>> norms(p.Bs.size());
  std::vector<double> last_ratios;
  double free_norm = NAN;

  for (std::size_t k = 0; k < p.Bs.size(); ++k) {
    const double B = p.Bs[k];
    const double h = grid_spacing(p.side, B, p.flux);
    const Grid g({0.0, 0.0}, p.side, h);
    const double E0 = discrete_landau_energy(B, h);
    const auto H0 = ham::assemble_free(B, g);
    ham::EigsOptions o;
    const auto P0 = ham::eigs_window(H0, E0 - 0.5 * B, E0 + 0.5 * B, o);
    const auto& X = *P0.eigenvectors;
    if (k == 0) {
      // Unperturbed: a window about E0 sees only P0 states.
      const auto Ef = ham::eigs_window(H0, E0 - p.M, E0 + p.M, o);
      free_norm = Ef.eigenvalues.size() ? projected_norm(X, *Ef.eigenvectors) : 0.0;
    }
    const auto sites = detail::covering_sites(g, p.r_u);
    const pot::SiteBox random = pot::SiteBox::centered(p.radius);
    std::vector<double> nr(T, NAN), tr(T, NAN), st(T, 0);
    parallel_for(T, ctx.jobs, [&](std::size_t t) {
      const auto V = restricted_sample(spec, sites, random, stream_seed(ctx.seed, detail::key(k, t)), bump);
      const auto H = ham::assemble(B, V, g);
      const auto Ed = ham::eigs_window(H, E0 + p.window_lo * p.M, E0 + p.window_hi * p.M, o);
      st[t] = static_cast<double>(Ed.eigenvalues.size());
      if (Ed.eigenvalues.size() == 0) return;
      const auto& Y = *Ed.eigenvectors;
      nr[t] = projected_norm(X, Y);
      tr[t] = static_cast<double>(Y.cols()) / (X.adjoint() * Y).squaredNorm();
    });
    for (std::size_t t = 0; t < T; ++t) {
      s.add({B, h, E0, double(t), st[t], nr[t], tr[t]});
      if (std::isfinite(nr[t])) norms[k].push_back(nr[t]);
    }
    if (k + 1 == p.Bs.size())
      for (double r : tr)
        if (std::isfinite(r)) last_ratios.push_back(r);
  }
  rep.add_check("free_case_zero", free_norm < 1e-8, free_norm, "V = 0: ||E Q0 E|| vanishes");

  auto exponent = [&](const std::vector<std::vector<std::size_t>>* idx) {
    std::vector<double> x, y;
    for (std::size_t k = 0; k < norms.size(); ++k) {
      if (norms[k].empty()) continue;
      double m = 0;
      std::size_t n = 0;
      if (idx)
        for (auto i : (*idx)[k]) m += norms[k][i], ++n;
      else
        for (double v : norms[k]) m += v, ++n;
      m /= static_cast<double>(n);
      if (!(m > 0)) continue;
      x.push_back(std::log(p.Bs[k]));
      y.push_back(std::log(m));
    }
    return x.size() >= 2 ? linear_fit(x, y).slope : NAN;
  };
  const double ex = exponent(nullptr);
  std::vector<double> bs;
  Rng rng(stream_seed(ctx.seed, 1u << 20));
  for (std::size_t b = 0; b < kBootstrap; ++b) {
    std::vector<std::vector<std::size_t>> idx(norms.size());
    for (std::size_t k = 0; k < norms.size(); ++k)
      for (std::size_t i = 0; i < norms[k].size(); ++i) idx[k].push_back(rng.below(norms[k].size()));
    const double v = exponent(&idx);
    if (std::isfinite(v)) bs.push_back(v);
  }
  rep.add_fit({"norm_exponent", ex, bs.empty() ? NAN : percentile(bs, 0.025),
               bs.empty() ? NAN : percentile(bs, 0.975), bs.size(),
               "slope of log mean ||E Q0 E|| against log B"});
  rep.add_check("norm_exponent", ex >= p.exponent_lo && ex <= p.exponent_hi, ex,
                "B-exponent in [" + fmt(p.exponent_lo) + ", " + fmt(p.exponent_hi) + "]");
  const double worst = last_ratios.empty() ? NAN : *std::max_element(last_ratios.begin(), last_ratios.end());
  rep.add_check("trace_ratio", !last_ratios.empty() && worst <= p.trace_ratio_max, worst,
                "Tr E / Tr(P0 E P0) <= " + fmt(p.trace_ratio_max) + " for every draw at the largest B");
  return rep;
}

// --------------------------------------------------------------- offdiag --

ExperimentReport offdiag(const OffdiagParams& p, const Context& ctx) {
  ExperimentReport rep;
  auto& s = rep.add_series("offdiag", {"B", "h", "dimension", "p0_rank", "norm", "constant_norm", "pq_norm"});
  std::vector<double> xs, ys;
  double worst_const = 0, worst_pq = 0;
  for (double B : p.Bs) {
    const double h = grid_spacing(p.side, B, p.flux);
    const Grid g({0.0, 0.0}, p.side, h);
    const double E0 = discrete_landau_energy(B, h);
    const auto H0 = ham::assemble_free(B, g);
    const auto P0 = ham::eigs_window(H0, E0 - 0.5 * B, E0 + 0.5 * B);
    const auto& X = *P0.eigenvectors;
    const double r2 = p.r_u * p.r_u;
    const Eigen::VectorXd V = ham::sample_on_grid(g, [&](Vec2 x) {
      const double t = 1.0 - dot(x, x) / r2;
      return t > 0 ? p.lambda * t * t * t : 0.0;
    });
    // ||P V Q||^2 = lambda_max(X^* V^2 X - (X^* V X)^2).
    auto pvq = [&](const Eigen::VectorXd& v) {
      const Eigen::MatrixXcd VX = v.cast<ham::cplx>().asDiagonal() * X;
      const Eigen::MatrixXcd C = X.adjoint() * VX;
      Eigen::MatrixXcd A = VX.adjoint() * VX - C * C;
      A = 0.5 * (A + A.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A, Eigen::EigenvaluesOnly);
      return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    };
    const double n = pvq(V);
    const double nc = pvq(Eigen::VectorXd::Constant(V.size(), p.lambda));
    const Eigen::MatrixXcd XtX = X.adjoint() * X;
    const double pq = (X.adjoint() - XtX * X.adjoint()).norm();
    worst_const = std::max(worst_const, nc);
    worst_pq = std::max(worst_pq, pq);
    s.add({B, h, double(H0.size()), double(X.cols()), n, nc, pq});
    xs.push_back(std::log(B));
    ys.push_back(std::log(n));
  }
  // The square root of a cancelling difference bottoms out near sqrt(eps) |c|.
  rep.add_check("constant_potential_commutes", worst_const < 1e-6 * std::max(1.0, std::abs(p.lambda)), worst_const,
                "||P0 c Q0|| vanishes for constant c (to the sqrt(eps) floor)");
  rep.add_check("projector_orthogonality", worst_pq < 1e-8, worst_pq, "||P0^* Q0|| (Frobenius bound) vanishes");
  if (xs.size() >= 2) {
    const auto f = linear_fit(xs, ys);
    const auto ci = bootstrap_slope(xs, ys, kBootstrap, stream_seed(ctx.seed, 1));
    rep.add_fit({"offdiag_exponent", f.slope, ci.low, ci.high, kBootstrap,
                 "slope of log ||P0 V Q0|| against log B (pairs bootstrap over B)"});
    rep.add_check("offdiag_exponent", f.slope >= p.exponent_lo && f.slope <= p.exponent_hi, f.slope,
                  "B-exponent in [" + fmt(p.exponent_lo) + ", " + fmt(p.exponent_hi) + "]");
  }
  return rep;
}

}  // namespace landloc::experiments
