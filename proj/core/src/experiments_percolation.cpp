#include <cmath>
#include <stdexcept>

#include "experiments_common.hpp"
#include "landloc/experiments.hpp"
#include "landloc/parallel.hpp"
#include "landloc/percolation.hpp"
#include "landloc/potential.hpp"

namespace landloc::experiments {

using detail::fmt;
namespace perc = percolation;

namespace {

// Resampling T Bernoulli trials with replacement from an observed count is a
// Binomial(T, k/T) draw.
std::size_t binomial(Rng& rng, std::size_t trials, double p) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < trials; ++i) k += rng.uniform() < p;
  return k;
}

// log(1 - R) with the +1/2 continuity correction, finite when no failure
// was observed.
double log_failure(std::size_t successes, std::size_t trials) {
  const double f = static_cast<double>(trials - successes);
  return std::log((f + 0.5) / (static_cast<double>(trials) + 1.0));
}

}  // namespace

ExperimentReport perc_crossing(const CrossingParams& p, const Context& ctx) {
  ExperimentReport rep;
  const auto T = static_cast<std::size_t>(p.trials);
  auto& s = rep.add_series("crossing", {"p", "n", "ell", "trials", "estimate", "ci_low", "ci_high",
                                        "seed", "log_one_minus"});
  std::vector<double> xs, ys;
  std::vector<std::size_t> succ;
  for (std::size_t k = 0; k < p.ells.size(); ++k) {
    const auto ell = p.ells[k];
    const std::uint64_t seed = stream_seed(ctx.seed, k);
    const auto est = perc::estimate_crossing_prob(p.n, ell, p.p, T, seed, ctx.jobs);
    const double lf = log_failure(est.crossing.successes, T);
    s.add({p.p, static_cast<double>(p.n), static_cast<double>(ell), static_cast<double>(T),
           est.crossing.estimate, est.crossing.ci.low, est.crossing.ci.high, static_cast<double>(seed), lf});
    xs.push_back(static_cast<double>(ell));
    ys.push_back(lf);
    succ.push_back(est.crossing.successes);
  }

  if (xs.size() >= 2) {
    const auto fit = linear_fit(xs, ys);
    // Parametric bootstrap of the slope: each point's count redrawn.
    Rng rng(stream_seed(ctx.seed, 1000));
    std::vector<double> slopes;
    for (std::size_t b = 0; b < kBootstrap; ++b) {
      std::vector<double> yb;
      for (std::size_t k = 0; k < xs.size(); ++k)
        yb.push_back(log_failure(binomial(rng, T, static_cast<double>(succ[k]) / T), T));
      slopes.push_back(linear_fit(xs, yb).slope);
    }
    std::sort(slopes.begin(), slopes.end());
    const double lo = slopes[static_cast<std::size_t>(0.025 * (slopes.size() - 1))];
    const double hi = slopes[static_cast<std::size_t>(0.975 * (slopes.size() - 1))];
    rep.add_fit({"log_one_minus_slope", fit.slope, lo, hi, kBootstrap,
                 "slope of log(1 - R) in ell; -slope estimates the crossing decay rate"});
    rep.add_fit({"log_one_minus_r2", fit.r_squared, fit.r_squared, fit.r_squared, 0, "R^2 of the linear fit"});
    bool decreasing = true;
    for (std::size_t k = 1; k < ys.size(); ++k) decreasing = decreasing && ys[k] < ys[k - 1];
    rep.add_check("log_one_minus_decreasing", decreasing, fit.slope, "log(1 - R) strictly decreasing in ell");
    rep.add_check("log_one_minus_linear", fit.r_squared >= p.min_r2, fit.r_squared,
                  "R^2 >= " + fmt(p.min_r2));
  }

  const std::uint64_t cseed = stream_seed(ctx.seed, 2000);
  const auto crit = perc::estimate_crossing_prob(1, p.critical_ell, p.critical_p, T, cseed, ctx.jobs);
  auto& c = rep.add_series("critical", {"p", "n", "ell", "trials", "estimate", "ci_low", "ci_high", "seed"});
  c.add({p.critical_p, 1.0, static_cast<double>(p.critical_ell), static_cast<double>(T),
         crit.crossing.estimate, crit.crossing.ci.low, crit.crossing.ci.high, static_cast<double>(cseed)});
  rep.add_check("critical_crossing_in_band",
                crit.crossing.estimate >= p.critical_lo && crit.crossing.estimate <= p.critical_hi,
                crit.crossing.estimate, "R_{1," + std::to_string(p.critical_ell) + "} in [" +
                                            fmt(p.critical_lo) + ", " + fmt(p.critical_hi) + "]");
  return rep;
}

ExperimentReport perc_circuit(const CircuitParams& p, const Context& ctx) {
  ExperimentReport rep;
  const auto T = static_cast<std::size_t>(p.trials);
  auto& s = rep.add_series("circuit", {"p", "ell", "trials", "circuit", "circuit_ci_low", "circuit_ci_high",
                                       "crossing3", "bound", "pooled_se", "margin_se", "implication_trials",
                                       "implication_failures"});
  bool all_ok = true, implication_ok = true;
  double worst = INFINITY;
  for (std::size_t k = 0; k < p.ps.size(); ++k) {
    const double q = p.ps[k];
    const auto A = perc::estimate_circuit_prob(p.ell, q, T, stream_seed(ctx.seed, 3 * k), ctx.jobs);
    const auto R = perc::estimate_crossing_prob(3, p.ell, q, T, stream_seed(ctx.seed, 3 * k + 1), ctx.jobs);
    const double r = R.crossing.estimate;
    const double bound = r * r * r * r;
    const double se_b = 4.0 * r * r * r * R.crossing.standard_error();
    const double pooled = std::hypot(A.circuit.standard_error(), se_b);
    const double margin = pooled > 0 ? (A.circuit.estimate - bound) / pooled : (A.circuit.estimate >= bound ? INFINITY : -INFINITY);
    const bool ok = A.circuit.estimate >= bound - p.se_multiple * pooled;
    all_ok = all_ok && ok;
    worst = std::min(worst, margin);

    // Four crossings of the strips force a circuit: checked trial by trial.
    const std::size_t n_imp = std::min<std::size_t>(T, 500);
    const perc::Annulus ann{{0, 0}, p.ell};
    std::vector<std::uint8_t> fail(n_imp, 0);
    const std::uint64_t iseed = stream_seed(ctx.seed, 3 * k + 2);
    parallel_for(n_imp, ctx.jobs, [&](std::size_t t) {
      const auto cfg = perc::sample_bonds(q, ann.outer(), stream_seed(iseed, t));
      if (!perc::four_strip_crossings(cfg, ann)) return;
      const auto c = perc::find_closed_circuit(cfg, ann);
      fail[t] = !c || !perc::check_circuit(*c, cfg).valid();
    });
    std::size_t nf = 0;
    for (auto f : fail) nf += f;
    implication_ok = implication_ok && nf == 0;
    s.add({q, static_cast<double>(p.ell), static_cast<double>(T), A.circuit.estimate, A.circuit.ci.low,
           A.circuit.ci.high, r, bound, pooled, margin, static_cast<double>(n_imp), static_cast<double>(nf)});
  }
  rep.add_check("circuit_above_crossing_bound", all_ok, worst,
                "A >= R3^4 - " + fmt(p.se_multiple) + " pooled SE at every p; value = min (A - R3^4)/SE");
  rep.add_check("four_strips_imply_circuit", implication_ok, 0.0, "no trial with four strip crossings lacks a circuit");
  return rep;
}

ExperimentReport ribbon(const RibbonParams& p, const Context& ctx) {
  namespace pot = potential;
  ExperimentReport rep;
  const auto bump = pot::SingleSiteBump::with_radius(p.r_u);
  pot::CouplingSpec spec;
  spec.M = p.M;
  const perc::Annulus ann{{0, 0}, p.ell};
  // Coupling sites under the outer box: internal vertex (m, n) sits at
  // (m - n, m + n) - (1/2, 1/2).
  const std::int64_t L = 3 * p.ell;
  const pot::SiteBox sites{{-L - 1, -1}, {L + 1, 2 * L + 1}};
  auto& s = rep.add_series("ribbon", {"E", "B", "p_occupied", "trials", "circuits", "ribbon_pass",
                                      "min_margin", "mean_margin", "max_mollified_shift", "shift_bound_ratio"});
  bool all_pass = true, smooth_ok = true;
  const auto T = static_cast<std::size_t>(p.trials);
  for (std::size_t k = 0; k < p.energies.size(); ++k) {
    const double E = p.energies[k];
    struct Out {
      bool circuit = false, pass = false;
      double margin = 0, shift = 0, bound = 0;
    };
    std::vector<Out> out(T);
    parallel_for(T, ctx.jobs, [&](std::size_t t) {
      const std::uint64_t seed = stream_seed(ctx.seed, detail::key(k, t));
      const auto V = pot::sample_couplings(spec, sites, seed, bump);
      const auto cfg = pot::occupied_bonds(V, E, p.B, ann.outer());
      const auto c = perc::find_closed_circuit(cfg, ann);
      if (!c) return;
      const auto rib = pot::build_ribbon(*c, p.r_u);
      const auto chk = pot::verify_ribbon_condition(rib, V, E, p.B, std::nullopt,
                                                    static_cast<std::size_t>(p.points) / 64 + 1, seed);
      Out o;
      o.circuit = true;
      o.pass = chk.pass;
      o.margin = chk.margin;
      if (p.mollifier > 0.0) {
        const pot::MollifiedPotential Vm(V, p.mollifier);
        const auto chm = pot::verify_ribbon_condition(
            rib, [&](Vec2 x) { return Vm(x); }, E, p.B, std::nullopt,
            static_cast<std::size_t>(p.points) / 64 + 1, seed);
        o.shift = std::abs(chm.margin - chk.margin);
        o.bound = p.mollifier * V.M0() * bump.gradient_bound();
      }
      out[t] = o;
    });
    std::size_t nc = 0, np = 0;
    double mn = INFINITY, sum = 0, shift = 0, ratio = 0;
    std::vector<double> margins;
    for (const auto& o : out) {
      if (!o.circuit) continue;
      ++nc;
      np += o.pass;
      mn = std::min(mn, o.margin);
      sum += o.margin;
      margins.push_back(o.margin);
      shift = std::max(shift, o.shift);
      if (o.bound > 0) ratio = std::max(ratio, o.shift / o.bound);
    }
    all_pass = all_pass && np == nc;
    smooth_ok = smooth_ok && ratio < 1.0;
    rep.samples["margins_E" + fmt(E)] = margins;
    s.add({E, p.B, pot::occupied_probability(spec, E, p.B), static_cast<double>(T), static_cast<double>(nc),
           static_cast<double>(np), nc ? mn : NAN, nc ? sum / nc : NAN, shift, ratio});
  }
  rep.add_check("ribbon_condition_on_every_circuit", all_pass, 0.0,
                "V + B - E stays beyond a = |E - B|/2 on the ribbon of every circuit found");
  if (p.mollifier > 0.0)
    rep.add_check("mollified_margin_shift", smooth_ok, 0.0,
                  "mollifying changes the ribbon margin by less than eps sup|grad V|");
  return rep;
}

}  // namespace landloc::experiments
