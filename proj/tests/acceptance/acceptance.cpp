// Acceptance suite: one line per criterion, "PASS" or "FAIL", with the
// measured values, the wall time and its budget. A criterion passes when its
// checks pass within the time budget.
//
//   landloc_acceptance                     run everything
//   landloc_acceptance --criterion wegner  run one criterion
//   landloc_acceptance --list

#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "landloc/config.hpp"
#include "landloc/experiments.hpp"
#include "landloc/percolation.hpp"

namespace ex = landloc::experiments;
namespace perc = landloc::percolation;
using landloc::ExperimentReport;
using landloc::format_number;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  std::string description;
  double budget_seconds;
  std::function<Outcome()> body;
};

struct Settings {
  std::uint64_t seed = 20240601;
  unsigned jobs = 1;
  std::string out;
};

Settings settings;

ExperimentReport run_experiment(const std::string& name, const landloc::config::Section& values = {},
                                unsigned jobs = 0) {
  const auto* e = ex::find_experiment(name);
  if (!e) throw std::runtime_error("no experiment " + name);
  auto rep = ex::run(*e, values, {settings.seed, jobs ? jobs : settings.jobs});
  if (!settings.out.empty()) rep.write(settings.out);
  return rep;
}

// Passes when every named check passes; detail lists their values.
Outcome checks(const ExperimentReport& rep, std::initializer_list<const char*> names) {
  Outcome o{true, {}};
  for (const char* n : names) {
    const auto& c = rep.check(n);
    o.pass = o.pass && c.pass;
    o.detail += std::string(o.detail.empty() ? "" : "; ") + n + "=" + format_number(c.value) + (c.pass ? "" : " (fail)");
  }
  return o;
}

// ---------------------------------------------------------------------------
// Percolation oracle: every simple path of occupied bonds from the start side
// is enumerated; a crossing exists iff one of them reaches the far side.

struct PathSearch {
  const perc::BondConfig& c;
  const perc::Rectangle& r;
  perc::BoxRegion box;
  std::vector<char> on_path;

  std::size_t slot(landloc::Vec2i v) const {
    return static_cast<std::size_t>((v.y - box.lo.y) * (box.width + 1) + (v.x - box.lo.x));
  }
  bool at_far_side(landloc::Vec2i v) const {
    return r.long_axis == perc::Axis::horizontal ? v.x == box.lo.x + r.length : v.y == box.lo.y + r.length;
  }
  bool extend(landloc::Vec2i v) {
    if (at_far_side(v)) return true;
    on_path[slot(v)] = 1;
    const perc::Bond steps[4] = {{v, perc::Axis::horizontal},
                                 {v, perc::Axis::vertical},
                                 {{v.x - 1, v.y}, perc::Axis::horizontal},
                                 {{v.x, v.y - 1}, perc::Axis::vertical}};
    bool found = false;
    for (const auto& b : steps) {
      if (found || !box.contains(b) || !c.occupied(b)) continue;
      const auto u = b.origin == v ? b.end() : b.origin;
      if (!on_path[slot(u)]) found = extend(u);
    }
    on_path[slot(v)] = 0;
    return found;
  }
  bool crosses() {
    box = r.box();
    on_path.assign(box.vertex_count(), 0);
    for (std::int64_t k = 0; k <= r.width; ++k) {
      const landloc::Vec2i s = r.long_axis == perc::Axis::horizontal ? landloc::Vec2i{box.lo.x, box.lo.y + k}
                                                                     : landloc::Vec2i{box.lo.x + k, box.lo.y};
      if (extend(s)) return true;
    }
    return false;
  }
};

Outcome percolation_oracle() {
  std::size_t shapes = 0, configs = 0, disagreements = 0;
  for (std::int64_t len = 1; len <= 12; ++len)
    for (std::int64_t wid = 0; wid <= 12; ++wid)
      for (auto axis : {perc::Axis::horizontal, perc::Axis::vertical}) {
        const perc::Rectangle rect{{-3, 5}, len, wid, axis};
        if (rect.box().bond_count() > 12) continue;
        ++shapes;
        perc::BondConfig c(rect.box());
        std::vector<perc::Bond> bonds;
        c.for_each_bond([&](const perc::Bond& b) { bonds.push_back(b); });
        for (std::size_t mask = 0; mask < (std::size_t{1} << bonds.size()); ++mask) {
          for (std::size_t k = 0; k < bonds.size(); ++k) c.set(bonds[k], (mask >> k) & 1U);
          ++configs;
          disagreements += perc::crossing_exists(c, rect) != PathSearch{c, rect, {}, {}}.crosses();
        }
      }
  return {disagreements == 0 && shapes > 0, std::to_string(shapes) + " shapes, " + std::to_string(configs) +
                                                " configurations, " + std::to_string(disagreements) +
                                                " disagreements"};
}

// ---------------------------------------------------------------------------
// Determinism: each experiment at reduced size, run serially twice and in
// parallel once; all CSV files must match byte for byte.

Outcome determinism() {
  using S = landloc::config::Section;
  const std::vector<std::pair<std::string, S>> small{
      {"perc-crossing", {{"trials", "200"}}},
      {"perc-circuit", {{"trials", "200"}}},
      {"ribbon", {{"trials", "8"}, {"points", "500"}}},
      {"projector", {}},
      {"wegner", {{"trials", "30"}}},
      {"ids", {{"trials", "4"}, {"side", "5"}}},
      {"band-projection", {{"Bs", "10, 20"}, {"trials", "2"}}},
      {"decay", {{"Bs", "10, 20"}, {"as", "0.25"}, {"trials", "1"}}},
      {"h1", {{"trials", "6"}, {"circuit_trials", "100"}}},
      {"spectral-averaging", {{"trials", "12"}, {"dim", "20"}}},
      {"offdiag", {{"Bs", "10, 20"}}},
  };
  const unsigned par = std::max(2u, settings.jobs);
  std::size_t files = 0;
  std::vector<std::string> bad;
  for (const auto& [name, values] : small) {
    const auto* e = ex::find_experiment(name);
    std::vector<std::vector<std::string>> csv;
    for (unsigned jobs : {1u, 1u, par}) {
      const auto rep = ex::run(*e, values, {settings.seed, jobs});
      std::vector<std::string> v;
      for (const auto& s : rep.series) v.push_back(rep.to_csv(s));
      csv.push_back(std::move(v));
    }
    files += csv[0].size();
    if (csv[0].empty() || csv[0] != csv[1] || csv[0] != csv[2]) bad.push_back(name);
  }
  std::string detail = std::to_string(files) + " CSV files from " + std::to_string(small.size()) +
                       " experiments, serial x2 and jobs=" + std::to_string(par);
  for (const auto& b : bad) detail += "; differs: " + b;
  return {bad.empty(), detail};
}

std::vector<Criterion> criteria() {
  return {
      {"percolation-oracle", "crossing_exists equals exhaustive path search on rectangles with <= 12 bonds", 60,
       percolation_oracle},
      {"crossing-shape", "p=0.6: log(1-R) decreasing and linear in ell (R^2 >= 0.9)", 120,
       [] { return checks(run_experiment("perc-crossing"), {"log_one_minus_decreasing", "log_one_minus_linear"}); }},
      {"circuit-inequality", "A_ell >= R_{3,ell}^4 - 3 pooled SE at p in {0.55, 0.6, 0.7}", 180,
       [] { return checks(run_experiment("perc-circuit"), {"circuit_above_crossing_bound"}); }},
      {"critical-point", "R_{1,24}(1/2) in [0.35, 0.65]", 60,
       [] { return checks(run_experiment("perc-crossing"), {"critical_crossing_in_band"}); }},
      {"projector-validation", "idempotency < 1e-6 and eigenrelation < 1e-4 relative", 120,
       [] { return checks(run_experiment("projector"), {"idempotency", "eigenrelation"}); }},
      {"projector-decay", "HS norm of chi1 P0 chi2 drops >= 10x from B=10 to 40", 60,
       [] { return checks(run_experiment("projector"), {"hs_decay_factor"}); }},
      {"wegner", "delta slope 1 +- 0.2 and volume ratio 4 +- 1 at B=20", 600,
       [] { return checks(run_experiment("wegner"), {"delta_slope", "volume_ratio"}); }},
      {"ids", "free steps within 20% of B/2pi; covering modulus bounded, non-covering grows >= 3x", 600,
       [] {
         return checks(run_experiment("ids"),
                       {"free_step_heights", "covering_modulus_bounded", "noncovering_modulus_grows"});
       }},
      {"band-projection", "B-exponent of ||E Q0 E|| in [-0.7, -0.3]", 300,
       [] { return checks(run_experiment("band-projection"), {"norm_exponent"}); }},
      {"decay", "gamma > 0, nondecreasing in B at small a, shape correlation >= 0.8", 600,
       [] {
         return checks(run_experiment("decay"), {"gamma_positive", "gamma_nondecreasing_in_B", "shape_correlation"});
       }},
      {"h1", "[H1] frequency at the band edge exceeds the Landau level by >= 0.2", 600,
       [] { return checks(run_experiment("h1"), {"band_edge_beats_landau_level"}); }},
      {"spectral-averaging", "averaging ratio <= 1 + 1e-3 on 1000 dim-50 instances", 120,
       [] { return checks(run_experiment("spectral-averaging"), {"averaging_bound"}); }},
      {"offdiag", "B-exponent of ||P0 V Q0|| in [-0.7, -0.3]", 180,
       [] { return checks(run_experiment("offdiag"), {"offdiag_exponent"}); }},
      {"determinism", "same seed gives byte-identical CSV, serial or parallel", 600, determinism},
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"landloc acceptance suite"};
  std::vector<std::string> only;
  bool list = false;
  settings.jobs = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--criterion", only, "run only these criteria (repeatable)");
  app.add_option("--seed", settings.seed, "master seed");
  app.add_option("--jobs", settings.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", settings.out, "also write experiment reports here");
  app.add_flag("--list", list, "list criteria");
  CLI11_PARSE(app, argc, argv);

  const auto all = criteria();
  if (list) {
    for (const auto& c : all) std::cout << c.name << "  " << c.description << "\n";
    return 0;
  }
  for (const auto& n : only) {
    bool known = false;
    for (const auto& c : all) known = known || c.name == n;
    if (!known) {
      std::cerr << "unknown criterion '" << n << "'\n";
      return 2;
    }
  }

  std::size_t ran = 0, failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::ostringstream line;
    line.precision(3);
    line << (pass ? "PASS " : "FAIL ") << c.name << "  [" << c.description << "]  " << o.detail << "  ("
         << std::fixed << secs << " s of " << c.budget_seconds << " s" << (in_time ? "" : ", over budget") << ")";
    std::cout << line.str() << std::endl;
  }
  std::cout << ran - failed << "/" << ran << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
