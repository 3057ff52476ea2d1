#include "doctest.h"

#include <string>

#include "landloc/config.hpp"
#include "landloc/experiments.hpp"

using namespace landloc;
using namespace landloc::config;

TEST_CASE("parse_config: sections, comments and line numbers") {
  const auto f = parse_config(
      "# top\n"
      "seed = 7\n"
      "\n"
      "[wegner]\n"
      "trials = 40   # inline\n"
      "deltas = 0.1, 0.2\n");
  CHECK(f.global.at("seed") == "7");
  CHECK(f.sections.at("wegner").at("trials") == "40");
  CHECK(f.sections.at("wegner").at("deltas") == "0.1, 0.2");

  try {
    parse_config("[a]\nx = 1\nx = 2\n");
    FAIL("duplicate key accepted");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
    CHECK(e.field() == "x");
  }
  CHECK_THROWS_AS(parse_config("[a\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[a]\njust words\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[a]\n= 3\n"), ConfigError);
}

TEST_CASE("load_config: defaults, file values and overrides") {
  const auto d = load_config(std::string_view{""});
  CHECK(d.seed == 20240601);
  CHECK(d.jobs == 1);
  CHECK(d.sections.empty());
  CHECK(d.unscoped.empty());

  const auto c = load_config(std::string_view{"seed = 3\njobs = 2\n[wegner]\ntrials = 9\n"},
                             {"wegner.trials=11", "trials=10", "seed=5"});
  CHECK(c.seed == 5);
  CHECK(c.jobs == 2);
  CHECK(c.sections.at("wegner").at("trials") == "11");
  CHECK(c.unscoped.at("trials") == "10");

  CHECK_THROWS_AS(load_config(std::string_view{"colour = red\n"}), ConfigError);
  CHECK_THROWS_AS(load_config(std::string_view{"jobs = 0\n"}), ConfigError);
  CHECK_THROWS_AS(load_config(std::string_view{"seed = -1\n"}), ConfigError);
  CHECK_THROWS_AS(load_config(std::string_view{""}, {"novalue"}), ConfigError);
}

TEST_CASE("ParamReader: defaults are materialized in read order") {
  ParamReader r("perc-crossing");
  CHECK(r.real_in("p", 0.6, 0, 1) == 0.6);
  CHECK(r.integer("trials", 2000, 1) == 2000);
  CHECK(r.integers("ells", {8, 16}) == std::vector<std::int64_t>{8, 16});
  CHECK(r.flag("verbose", false) == false);
  r.finish();
  REQUIRE(r.entries().size() == 4);
  CHECK(r.entries()[0].key == "p");
  CHECK(r.entries()[0].value == "0.6");
  CHECK(r.entries()[2].value == "8, 16");
}

TEST_CASE("ParamReader: overrides, ranges and unknown keys") {
  {
    ParamReader r("perc-crossing", {{"trials", "10"}});
    CHECK(r.integer("trials", 2000, 1) == 10);
  }
  {
    ParamReader r("perc-crossing", {{"p", "1.5"}});
    try {
      r.real_in("p", 0.6, 0, 1);
      FAIL("out-of-range value accepted");
    } catch (const ConfigError& e) {
      CHECK(e.field() == "p");
      CHECK(std::string(e.what()).find("[perc-crossing] p") != std::string::npos);
    }
  }
  {
    ParamReader r("x", {{"n", "2.5"}});
    CHECK_THROWS_AS(r.integer("n", 1), ConfigError);
  }
  {
    ParamReader r("x", {{"v", "1, two"}});
    CHECK_THROWS_AS(r.reals("v", {}), ConfigError);
  }
  {
    ParamReader r("x", {{"mode", "c"}});
    CHECK_THROWS_AS(r.choice("mode", "a", {"a", "b"}), ConfigError);
  }
  {
    ParamReader r("x", {{"trials", "5"}, {"tirals", "5"}});
    r.integer("trials", 1);
    try {
      r.finish();
      FAIL("unknown key accepted");
    } catch (const ConfigError& e) {
      CHECK(e.field() == "tirals");
    }
  }
}

TEST_CASE("every experiment parses its defaults and rejects unknown keys") {
  for (const auto& e : experiments::registry()) {
    CAPTURE(e.name);
    ParamReader r(e.name);
    CHECK_NOTHROW(e.prepare(r));
    CHECK_NOTHROW(r.finish());
    CHECK(!r.entries().empty());
    ParamReader bad(e.name, {{"no_such_key", "1"}});
    e.prepare(bad);
    CHECK_THROWS_AS(bad.finish(), ConfigError);
  }
  CHECK(experiments::find_experiment("percolation-crossing") == experiments::find_experiment("perc-crossing"));
  CHECK(experiments::find_experiment("nosuch") == nullptr);
}

TEST_CASE("experiment-level validation") {
  const auto* e = experiments::find_experiment("band-projection");
  ParamReader r(e->name, {{"window_lo", "0.8"}, {"window_hi", "0.2"}});
  CHECK_THROWS_AS(e->prepare(r), ConfigError);
  const auto* d = experiments::find_experiment("decay");
  ParamReader r2(d->name, {{"as", "0.1, 0"}});
  CHECK_THROWS_AS(d->prepare(r2), ConfigError);
}
