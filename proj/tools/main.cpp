// landloc: run named experiments from a key-value config and write reports.
//
// Exit status: 0 all checks passed, 1 some check failed, 2 usage or
// configuration error, 3 runtime failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "landloc/config.hpp"
#include "landloc/experiments.hpp"

namespace cfg = landloc::config;
namespace ex = landloc::experiments;

namespace {

// Keys an experiment understands: whatever its parser reads.
std::set<std::string> known_keys(const ex::Experiment& e) {
  cfg::ParamReader r(e.name);
  e.prepare(r);
  std::set<std::string> keys;
  for (const auto& p : r.entries()) keys.insert(p.key);
  return keys;
}

cfg::Section section_for(const ex::Experiment& e, const cfg::RunConfig& rc, bool only_known) {
  cfg::Section s;
  if (auto it = rc.sections.find(e.name); it != rc.sections.end()) s = it->second;
  for (const auto& alias : e.aliases)
    if (auto it = rc.sections.find(alias); it != rc.sections.end())
      for (const auto& [k, v] : it->second) s[k] = v;
  const auto keys = only_known ? known_keys(e) : std::set<std::string>{};
  for (const auto& [k, v] : rc.unscoped)
    if (!only_known || keys.count(k)) s[k] = v;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"landloc: desk-scale experiments on Landau Hamiltonians with random potentials"};
  std::string name;
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::optional<std::string> out;
  bool list = false;
  app.add_option("experiment", name, "experiment name, or 'all'");
  app.add_option("--config", config_path, "key-value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--set", sets, "override key=value or section.key=value (repeatable)");
  app.add_flag("--list", list, "list experiments and exit");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& e : ex::registry()) std::cout << e.name << "  " << e.summary << "\n";
    return 0;
  }
  if (name.empty()) {
    std::cerr << "error: no experiment given; valid experiments: " << ex::experiment_names() << ", all\n";
    return 2;
  }

  cfg::RunConfig rc;
  std::vector<const ex::Experiment*> todo;
  std::vector<cfg::Section> sections;
  try {
    const std::filesystem::path p(config_path);
    rc = cfg::load_config(config_path.empty() ? nullptr : &p, sets);
    if (seed) rc.seed = *seed;
    if (jobs) rc.jobs = *jobs;
    if (out) rc.out = *out;
    for (const auto& [sec, values] : rc.sections)
      if (!ex::find_experiment(sec))
        throw cfg::ConfigError("unknown section [" + sec + "]; valid experiments: " + ex::experiment_names(), sec);

    if (name == "all") {
      for (const auto& e : ex::registry()) todo.push_back(&e);
      for (const auto& [k, v] : rc.unscoped) {
        bool used = false;
        for (const auto* e : todo) used = used || known_keys(*e).count(k);
        if (!used) throw cfg::ConfigError("override '" + k + "' is not a parameter of any experiment", k);
      }
    } else {
      const auto* e = ex::find_experiment(name);
      if (!e) {
        std::cerr << "error: unknown experiment '" << name << "'; valid experiments: " << ex::experiment_names()
                  << ", all\n";
        return 2;
      }
      todo.push_back(e);
    }
    // Validate every parameter set before running anything.
    for (const auto* e : todo) {
      sections.push_back(section_for(*e, rc, name == "all"));
      cfg::ParamReader r(e->name, sections.back());
      e->prepare(r);
      r.finish();
    }
  } catch (const cfg::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  }

  bool all_passed = true;
  try {
    const ex::Context ctx{rc.seed, rc.jobs};
    for (std::size_t i = 0; i < todo.size(); ++i) {
      std::cout << "== " << todo[i]->name << " (seed " << rc.seed << ", jobs " << rc.jobs << ")" << std::endl;
      const auto rep = ex::run(*todo[i], sections[i], ctx);
      for (const auto& c : rep.checks)
        std::cout << "  " << (c.pass ? "PASS " : "FAIL ") << c.name << "  value=" << landloc::format_number(c.value)
                  << "  " << c.detail << "\n";
      for (const auto& f : rep.fits)
        std::cout << "  fit " << f.name << " = " << landloc::format_number(f.value) << " ["
                  << landloc::format_number(f.ci_low) << ", " << landloc::format_number(f.ci_high) << "]\n";
      for (const auto& path : rep.write(rc.out)) std::cout << "  wrote " << path.string() << "\n";
      std::cout << "  " << landloc::format_number(rep.wall_seconds) << " s" << std::endl;
      all_passed = all_passed && rep.passed();
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  }
  return all_passed ? 0 : 1;
}
