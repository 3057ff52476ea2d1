#include <cmath>

#include "experiments_common.hpp"
#include "landloc/experiments.hpp"
#include "landloc/parallel.hpp"
#include "landloc/projector.hpp"

namespace landloc::experiments {

using detail::fmt;

ExperimentReport projector(const ProjectorParams& p, const Context& ctx) {
  using namespace landloc::projector;
  ExperimentReport rep;

  struct Point {
    int n;
    double B;
    IdentityReport r;
  };
  std::vector<Point> pts;
  for (auto n : p.levels)
    for (double B : p.Bs) pts.push_back({static_cast<int>(n), B, {}});
  parallel_for(pts.size(), ctx.jobs,
               [&](std::size_t i) { pts[i].r = projector_identities_check(ProjectorKernel{pts[i].n, pts[i].B}); });

  auto& id = rep.add_series("identities", {"n", "B", "quantity", "value", "error_estimate"});
  // quantity codes: 0 idempotency, 1 eigenrelation, 2 diagonal, 3 hermiticity
  double worst_idem = 0, worst_eig = 0;
  for (const auto& pt : pts) {
    id.add({double(pt.n), pt.B, 0, pt.r.idempotency, 0});
    id.add({double(pt.n), pt.B, 1, pt.r.eigenrelation, 0});
    id.add({double(pt.n), pt.B, 2, pt.r.diagonal, 0});
    id.add({double(pt.n), pt.B, 3, pt.r.hermiticity, 0});
    worst_idem = std::max(worst_idem, pt.r.idempotency);
    worst_eig = std::max(worst_eig, pt.r.eigenrelation);
  }
  rep.add_check("idempotency", worst_idem < p.idempotency_tol, worst_idem,
                "max relative |PP - P| < " + fmt(p.idempotency_tol));
  rep.add_check("eigenrelation", worst_eig < p.eigenrelation_tol, worst_eig,
                "max relative |(H - E_n) P| < " + fmt(p.eigenrelation_tol));

  // Unit squares whose supports are `separation` apart.
  const BoxCutoff a = BoxCutoff::square({-0.5 - 0.5 * p.separation, 0.0}, 1.0);
  const BoxCutoff b = BoxCutoff::square({0.5 + 0.5 * p.separation, 0.0}, 1.0);
  std::vector<NormEstimate> hs(p.decay_Bs.size());
  parallel_for(hs.size(), ctx.jobs,
               [&](std::size_t i) { hs[i] = hs_norm_localized(ProjectorKernel{0, p.decay_Bs[i]}, {a, b}); });
  auto& dec = rep.add_series("hs_decay", {"n", "B", "delta", "hs_norm", "error_estimate"});
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    dec.add({0, p.decay_Bs[i], p.separation, hs[i].value, hs[i].error_estimate});
    xs.push_back(p.decay_Bs[i]);
    ys.push_back(std::log(hs[i].value));
  }
  if (xs.size() >= 2) {
    const auto f = linear_fit(xs, ys);
    const auto ci = bootstrap_slope(xs, ys, kBootstrap, stream_seed(ctx.seed, 1));
    rep.add_fit({"hs_log_slope_in_B", f.slope, ci.low, ci.high, kBootstrap,
                 "d log ||chi1 P0 chi2||_HS / dB at fixed separation"});
    const auto lo = std::min_element(xs.begin(), xs.end()) - xs.begin();
    const auto hi = std::max_element(xs.begin(), xs.end()) - xs.begin();
    const double drop = hs[lo].value / hs[hi].value;
    rep.add_check("hs_decay_factor", drop >= p.decay_factor, drop,
                  "HS norm at B=" + fmt(xs[lo]) + " over B=" + fmt(xs[hi]) + " >= " + fmt(p.decay_factor));
  }
  return rep;
}

}  // namespace landloc::experiments
