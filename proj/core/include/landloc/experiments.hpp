#pragma once

// Monte Carlo harnesses. Every experiment is a pure function of its
// parameters and the master seed: trial t of parameter point k draws from
// stream_seed(seed, key(k, t)) and results are reduced in index order, so
// the report does not depend on the number of worker threads.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "landloc/config.hpp"
#include "landloc/report.hpp"

namespace landloc::experiments {

struct Context {
  std::uint64_t seed = 20240601;
  unsigned jobs = 1;
};

/// Bootstrap resamples used for every interval.
inline constexpr std::size_t kBootstrap = 400;

/// Lowest bulk Landau energy of the Peierls model at (B, h): lowest
/// eigenvalue of the free operator on a Dirichlet box of side
/// max(3, 16 B^-1/2), which is exponentially close to the bulk value.
double discrete_landau_energy(double B, double h);
/// Largest h <= sqrt(flux / B) with side / (2h) integral.
double grid_spacing(double side, double B, double flux);

struct CrossingParams {
  double p = 0.6;
  std::int64_t n = 1;
  std::vector<std::int64_t> ells{8, 16, 32};
  std::int64_t trials = 2000;
  double critical_p = 0.5;
  std::int64_t critical_ell = 24;
  double min_r2 = 0.9;
  double critical_lo = 0.35;
  double critical_hi = 0.65;
};
CrossingParams parse_crossing(config::ParamReader& r);
ExperimentReport perc_crossing(const CrossingParams& p, const Context& ctx);

struct CircuitParams {
  std::vector<double> ps{0.55, 0.6, 0.7};
  std::int64_t ell = 16;
  std::int64_t trials = 2000;
  double se_multiple = 3.0;
};
CircuitParams parse_circuit(config::ParamReader& r);
ExperimentReport perc_circuit(const CircuitParams& p, const Context& ctx);

struct RibbonParams {
  double B = 10.0;
  std::vector<double> energies{10.6, 9.4};
  double M = 1.0;
  double r_u = 0.35;
  std::int64_t ell = 3;
  std::int64_t trials = 200;
  std::int64_t points = 4000;
  double mollifier = 0.1;
};
RibbonParams parse_ribbon(config::ParamReader& r);
ExperimentReport ribbon(const RibbonParams& p, const Context& ctx);

struct ProjectorParams {
  std::vector<std::int64_t> levels{0, 1};
  std::vector<double> Bs{10.0, 40.0};
  std::vector<double> decay_Bs{10.0, 20.0, 40.0};
  double separation = 1.0;
  double idempotency_tol = 1e-6;
  double eigenrelation_tol = 1e-4;
  double decay_factor = 10.0;
};
ProjectorParams parse_projector(config::ParamReader& r);
ExperimentReport projector(const ProjectorParams& p, const Context& ctx);

struct WegnerParams {
  double B = 20.0;
  double E = 12.5;
  double h = 0.1;
  double M = 40.0;
  double r_u = 0.35;
  std::vector<double> deltas{0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
  /// Random sites per box: 1 (side 1) and 4 (side 2).
  std::vector<std::int64_t> sides{1, 2};
  double collar = 1.0;
  std::int64_t trials = 500;
  double slope_target = 1.0;
  double slope_tol = 0.2;
  double ratio_target = 4.0;
  double ratio_tol = 1.0;
};
WegnerParams parse_wegner(config::ParamReader& r);
ExperimentReport wegner(const WegnerParams& p, const Context& ctx);

struct IdsParams {
  double B = 10.0;
  double side = 8.0;
  double flux = 0.2;
  double M = 1.0;
  std::int64_t trials = 40;
  std::vector<double> windows{0.4, 0.2, 0.1, 0.05, 0.025};
  double energy_span = 1.5;
  double energy_step = 0.05;
  double exclusion_c = 4.0;
  double step_tol = 0.2;
  double growth_threshold = 3.0;
};
IdsParams parse_ids(config::ParamReader& r);
ExperimentReport ids(const IdsParams& p, const Context& ctx);

struct BandParams {
  std::vector<double> Bs{10.0, 20.0, 40.0, 80.0};
  double side = 4.0;
  double flux = 0.2;
  double M = 3.0;
  double r_u = 0.35;
  std::int64_t radius = 1;
  /// Delta = [E0 + lo M, E0 + hi M).
  double window_lo = 0.1;
  double window_hi = 1.0;
  std::int64_t trials = 5;
  double exponent_lo = -0.7;
  double exponent_hi = -0.3;
  double trace_ratio_max = 2.0;
};
BandParams parse_band(config::ParamReader& r);
ExperimentReport band_projection(const BandParams& p, const Context& ctx);

struct DecayParams {
  std::vector<double> Bs{10.0, 20.0, 40.0};
  std::vector<double> as{0.1, 0.25, 0.5};
  double side = 6.0;
  double flux = 0.2;
  double M = 2.0;
  double r_u = 0.35;
  double mollifier = 0.1;
  double core = 1.0;
  std::vector<double> separations{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  double eps = 1e-3;
  std::int64_t trials = 2;
  double noise_floor = 1e-12;
  double min_correlation = 0.8;
};
DecayParams parse_decay(config::ParamReader& r);
ExperimentReport decay(const DecayParams& p, const Context& ctx);

struct H1Params {
  double B = 40.0;
  double ell0 = 12.0;
  double delta = 1.0;
  double h = 0.1;
  double M = 1.0;
  double r_u = 0.35;
  double sigma = 0.5;
  double a_scale = 1.0;
  double gamma0 = 1.0;
  double xi = 4.1;
  double eps = 1e-3;
  std::int64_t trials = 300;
  double min_difference = 0.2;
  std::int64_t circuit_trials = 2000;
};
H1Params parse_h1(config::ParamReader& r);
ExperimentReport h1(const H1Params& p, const Context& ctx);

struct AveragingParams {
  std::int64_t dim = 50;
  std::int64_t trials = 1000;
  std::vector<double> windows{0.02, 0.1, 0.4};
  double mollifier = 0.1;
  double tolerance = 1e-3;
};
AveragingParams parse_averaging(config::ParamReader& r);
ExperimentReport spectral_averaging(const AveragingParams& p, const Context& ctx);

struct OffdiagParams {
  std::vector<double> Bs{10.0, 20.0, 40.0, 80.0};
  double side = 5.0;
  double flux = 0.2;
  double r_u = 1.5;
  double lambda = 1.0;
  double exponent_lo = -0.7;
  double exponent_hi = -0.3;
};
OffdiagParams parse_offdiag(config::ParamReader& r);
ExperimentReport offdiag(const OffdiagParams& p, const Context& ctx);

struct Experiment {
  std::string name;
  std::vector<std::string> aliases;
  std::string summary;
  /// Reads and validates parameters (rejecting unknown keys) and returns the
  /// runner with those parameters bound.
  std::function<std::function<ExperimentReport(const Context&)>(config::ParamReader&)> prepare;
};

const std::vector<Experiment>& registry();
/// By name or alias; nullptr if unknown.
const Experiment* find_experiment(std::string_view name);
std::string experiment_names();

/// Parses `values`, runs, stamps parameters, seed and wall-clock.
ExperimentReport run(const Experiment& e, const config::Section& values, const Context& ctx);

}  // namespace landloc::experiments
