#include "landloc/experiments.hpp"

#include <chrono>
#include <map>
#include <mutex>
#include <stdexcept>

#include <Eigen/Dense>

#include "experiments_common.hpp"
#include "landloc/hamiltonian.hpp"

namespace landloc::experiments {

namespace detail {

std::vector<double> weighted_lsq(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                                 const std::vector<double>& w) {
  if (X.empty()) return {};
  const auto n = static_cast<Eigen::Index>(X.size());
  const auto p = static_cast<Eigen::Index>(X.front().size());
  Eigen::MatrixXd A(n, p);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = std::sqrt(w[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < p; ++j) A(i, j) = s * X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    b(i) = s * y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd beta = A.colPivHouseholderQr().solve(b);
  if (A.colPivHouseholderQr().rank() < p) return std::vector<double>(static_cast<std::size_t>(p), NAN);
  return {beta.data(), beta.data() + p};
}

double safe_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return NAN;
  const double c = correlation(x, y);
  return std::isfinite(c) ? c : NAN;
}

std::string fmt(double x) { return format_number(x); }

}  // namespace detail

double grid_spacing(double side, double B, double flux) {
  const double hmax = std::sqrt(flux / B);
  return side / (2.0 * std::ceil(side / (2.0 * hmax) - 1e-12));
}

double discrete_landau_energy(double B, double h) {
  static std::mutex mu;
  static std::map<std::pair<double, double>, double> cache;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find({B, h}); it != cache.end()) return it->second;
  }
  double L = std::max(3.0, 16.0 / std::sqrt(B));
  L = 2.0 * h * std::ceil(L / (2.0 * h) - 1e-12);
  const auto H = hamiltonian::assemble_free(B, Grid({0.0, 0.0}, L, h));
  hamiltonian::EigsOptions o;
  o.vectors = false;
  const double E0 = hamiltonian::eigs_lowest(H, 1, o).eigenvalues[0];
  std::lock_guard lock(mu);
  cache[{B, h}] = E0;
  return E0;
}

// Parameter readers. Names match the struct fields.

CrossingParams parse_crossing(config::ParamReader& r) {
  CrossingParams p;
  p.p = r.real_in("p", p.p, 0.0, 1.0);
  p.n = r.integer("n", p.n, 1, 64);
  p.ells = r.integers("ells", p.ells, 1, 4096);
  p.trials = r.integer("trials", p.trials, 1, 100000000);
  p.critical_p = r.real_in("critical_p", p.critical_p, 0.0, 1.0);
  p.critical_ell = r.integer("critical_ell", p.critical_ell, 1, 4096);
  p.min_r2 = r.real_in("min_r2", p.min_r2, 0.0, 1.0);
  p.critical_lo = r.real_in("critical_lo", p.critical_lo, 0.0, 1.0);
  p.critical_hi = r.real_in("critical_hi", p.critical_hi, 0.0, 1.0);
  return p;
}

CircuitParams parse_circuit(config::ParamReader& r) {
  CircuitParams p;
  p.ps = r.reals("ps", p.ps, 0.0, 1.0);
  p.ell = r.integer("ell", p.ell, 1, 4096);
  p.trials = r.integer("trials", p.trials, 1, 100000000);
  p.se_multiple = r.real_in("se_multiple", p.se_multiple, 0.0, 100.0);
  return p;
}

RibbonParams parse_ribbon(config::ParamReader& r) {
  RibbonParams p;
  p.B = r.positive("B", p.B);
  p.energies = r.reals("energies", p.energies, 0.0, 1e6);
  p.M = r.positive("M", p.M);
  p.r_u = r.real_in("r_u", p.r_u, 1e-3, 0.7071);
  p.ell = r.integer("ell", p.ell, 1, 64);
  p.trials = r.integer("trials", p.trials, 1, 1000000);
  p.points = r.integer("points", p.points, 16, 10000000);
  p.mollifier = r.real_in("mollifier", p.mollifier, 0.0, 1.0);
  return p;
}

ProjectorParams parse_projector(config::ParamReader& r) {
  ProjectorParams p;
  p.levels = r.integers("levels", p.levels, 0, 20);
  p.Bs = r.reals("Bs", p.Bs, 1e-3, 1e4);
  p.decay_Bs = r.reals("decay_Bs", p.decay_Bs, 1e-3, 1e4);
  p.separation = r.positive("separation", p.separation);
  p.idempotency_tol = r.positive("idempotency_tol", p.idempotency_tol);
  p.eigenrelation_tol = r.positive("eigenrelation_tol", p.eigenrelation_tol);
  p.decay_factor = r.positive("decay_factor", p.decay_factor);
  return p;
}

WegnerParams parse_wegner(config::ParamReader& r) {
  WegnerParams p;
  p.B = r.positive("B", p.B);
  p.E = r.real("E", p.E);
  p.h = r.positive("h", p.h);
  p.M = r.positive("M", p.M);
  p.r_u = r.real_in("r_u", p.r_u, 1e-3, 0.7071);
  p.deltas = r.reals("deltas", p.deltas, 0.0, 1e6);
  p.sides = r.integers("sides", p.sides, 1, 64);
  p.collar = r.real_in("collar", p.collar, 0.0, 16.0);
  p.trials = r.integer("trials", p.trials, 1, 10000000);
  p.slope_target = r.real("slope_target", p.slope_target);
  p.slope_tol = r.positive("slope_tol", p.slope_tol);
  p.ratio_target = r.positive("ratio_target", p.ratio_target);
  p.ratio_tol = r.positive("ratio_tol", p.ratio_tol);
  return p;
}

IdsParams parse_ids(config::ParamReader& r) {
  IdsParams p;
  p.B = r.positive("B", p.B);
  p.side = r.positive("side", p.side);
  p.flux = r.real_in("flux", p.flux, 1e-6, 3.14159);
  p.M = r.positive("M", p.M);
  p.trials = r.integer("trials", p.trials, 2, 1000000);
  p.windows = r.reals("windows", p.windows, 1e-9, 1e6);
  p.energy_span = r.positive("energy_span", p.energy_span);
  p.energy_step = r.positive("energy_step", p.energy_step);
  p.exclusion_c = r.real_in("exclusion_c", p.exclusion_c, 0.0, 1e6);
  p.step_tol = r.positive("step_tol", p.step_tol);
  p.growth_threshold = r.positive("growth_threshold", p.growth_threshold);
  return p;
}

BandParams parse_band(config::ParamReader& r) {
  BandParams p;
  p.Bs = r.reals("Bs", p.Bs, 1e-3, 1e4);
  p.side = r.positive("side", p.side);
  p.flux = r.real_in("flux", p.flux, 1e-6, 3.14159);
  p.M = r.positive("M", p.M);
  p.r_u = r.real_in("r_u", p.r_u, 1e-3, 0.7071);
  p.radius = r.integer("radius", p.radius, 0, 64);
  p.window_lo = r.real("window_lo", p.window_lo);
  p.window_hi = r.real("window_hi", p.window_hi);
  p.trials = r.integer("trials", p.trials, 1, 100000);
  p.exponent_lo = r.real("exponent_lo", p.exponent_lo);
  p.exponent_hi = r.real("exponent_hi", p.exponent_hi);
  p.trace_ratio_max = r.positive("trace_ratio_max", p.trace_ratio_max);
  if (!(p.window_lo < p.window_hi)) throw config::ConfigError("[band-projection] window_lo must be < window_hi", "window_lo");
  return p;
}

DecayParams parse_decay(config::ParamReader& r) {
  DecayParams p;
  p.Bs = r.reals("Bs", p.Bs, 1e-3, 1e4);
  p.as = r.reals("as", p.as, 0.0, 1e4);
  p.side = r.positive("side", p.side);
  p.flux = r.real_in("flux", p.flux, 1e-6, 3.14159);
  p.M = r.positive("M", p.M);
  p.r_u = r.real_in("r_u", p.r_u, 1e-3, 0.7071);
  p.mollifier = r.real_in("mollifier", p.mollifier, 0.0, 1.0);
  p.core = r.positive("core", p.core);
  p.separations = r.reals("separations", p.separations, 0.0, 1e4);
  p.eps = r.real_in("eps", p.eps, 0.0, 1e6);
  p.trials = r.integer("trials", p.trials, 1, 100000);
  p.noise_floor = r.positive("noise_floor", p.noise_floor);
  p.min_correlation = r.real_in("min_correlation", p.min_correlation, -1.0, 1.0);
  for (double a : p.as)
    if (!(a > 0.0)) throw config::ConfigError("[decay] as: a = 0 (E at the Landau energy) is excluded", "as");
  return p;
}

H1Params parse_h1(config::ParamReader& r) {
  H1Params p;
  p.B = r.positive("B", p.B);
  p.ell0 = r.positive("ell0", p.ell0);
  p.delta = r.positive("delta", p.delta);
  p.h = r.positive("h", p.h);
  p.M = r.positive("M", p.M);
  p.r_u = r.real_in("r_u", p.r_u, 1e-3, 0.7071);
  p.sigma = r.real_in("sigma", p.sigma, 0.0, 1.0);
  p.a_scale = r.positive("a_scale", p.a_scale);
  p.gamma0 = r.positive("gamma0", p.gamma0);
  p.xi = r.positive("xi", p.xi);
  p.eps = r.positive("eps", p.eps);
  p.trials = r.integer("trials", p.trials, 1, 1000000);
  p.min_difference = r.real_in("min_difference", p.min_difference, 0.0, 1.0);
  p.circuit_trials = r.integer("circuit_trials", p.circuit_trials, 1, 100000000);
  return p;
}

AveragingParams parse_averaging(config::ParamReader& r) {
  AveragingParams p;
  p.dim = r.integer("dim", p.dim, 1, 200);
  p.trials = r.integer("trials", p.trials, 1, 10000000);
  p.windows = r.reals("windows", p.windows, 0.0, 1e6);
  p.mollifier = r.real_in("mollifier", p.mollifier, 1e-6, 1.0);
  p.tolerance = r.positive("tolerance", p.tolerance);
  return p;
}

OffdiagParams parse_offdiag(config::ParamReader& r) {
  OffdiagParams p;
  p.Bs = r.reals("Bs", p.Bs, 1e-3, 1e4);
  p.side = r.positive("side", p.side);
  p.flux = r.real_in("flux", p.flux, 1e-6, 3.14159);
  p.r_u = r.positive("r_u", p.r_u);
  p.lambda = r.real("lambda", p.lambda);
  p.exponent_lo = r.real("exponent_lo", p.exponent_lo);
  p.exponent_hi = r.real("exponent_hi", p.exponent_hi);
  return p;
}

namespace {

template <class Params, class Parse, class Run>
Experiment make(std::string name, std::vector<std::string> aliases, std::string summary, Parse parse,
                Run runfn) {
  return Experiment{std::move(name), std::move(aliases), std::move(summary),
                    [parse, runfn](config::ParamReader& r) -> std::function<ExperimentReport(const Context&)> {
                      Params p = parse(r);
                      return [p, runfn](const Context& ctx) { return runfn(p, ctx); };
                    }};
}

}  // namespace

const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> list = {
      make<CrossingParams>("perc-crossing", {"percolation-crossing"},
                           "rectangle crossing probabilities vs size, critical-point check",
                           parse_crossing, perc_crossing),
      make<CircuitParams>("perc-circuit", {"percolation-circuit"},
                          "annulus circuit frequency vs four-strip crossing bound", parse_circuit,
                          perc_circuit),
      make<RibbonParams>("ribbon", {}, "ribbon condition around occupied circuits", parse_ribbon, ribbon),
      make<ProjectorParams>("projector", {}, "Landau projector identities and off-diagonal decay",
                            parse_projector, projector),
      make<WegnerParams>("wegner", {}, "probability of eigenvalues near E vs delta and volume",
                         parse_wegner, wegner),
      make<IdsParams>("ids", {"integrated-density-of-states"},
                      "integrated density of states, covering vs non-covering bumps", parse_ids, ids),
      make<BandParams>("band-projection", {}, "norm of E_Delta Q0 E_Delta vs B, trace ratio",
                       parse_band, band_projection),
      make<DecayParams>("decay", {}, "Green function decay rate below the band", parse_decay, decay),
      make<H1Params>("h1", {}, "initial-scale resolvent event, band edge vs Landau level", parse_h1, h1),
      make<AveragingParams>("spectral-averaging", {}, "spectral averaging bound on random matrices",
                            parse_averaging, spectral_averaging),
      make<OffdiagParams>("offdiag", {"projector-offdiag"}, "norm of P0 V Q0 vs B", parse_offdiag, offdiag),
  };
  return list;
}

const Experiment* find_experiment(std::string_view name) {
  for (const auto& e : registry()) {
    if (e.name == name) return &e;
    for (const auto& a : e.aliases)
      if (a == name) return &e;
  }
  return nullptr;
}

std::string experiment_names() {
  std::string out;
  for (const auto& e : registry()) out += (out.empty() ? "" : ", ") + e.name;
  return out;
}

ExperimentReport run(const Experiment& e, const config::Section& values, const Context& ctx) {
  config::ParamReader reader(e.name, values);
  auto runner = e.prepare(reader);
  reader.finish();
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep = runner(ctx);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.experiment = e.name;
  rep.seed = ctx.seed;
  rep.parameters = reader.entries();
  return rep;
}

}  // namespace landloc::experiments
