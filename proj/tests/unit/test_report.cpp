#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "landloc/config.hpp"
#include "landloc/experiments.hpp"
#include "landloc/report.hpp"
#include "landloc/rng.hpp"

using namespace landloc;

namespace {

ExperimentReport sample_report() {
  ExperimentReport r;
  r.experiment = "demo";
  r.seed = 42;
  r.parameters = {{"B", "10"}, {"ells", "8, 16"}};
  auto& s = r.add_series("curve", {"x", "y"});
  s.add({1.0, 0.1});
  s.add({2.0, std::numeric_limits<double>::quiet_NaN()});
  r.add_fit({"slope", -0.5, -0.6, -0.4, 400, "note"});
  r.add_check("ok", true, 1.0, "fine");
  r.add_check("bad", false, std::numeric_limits<double>::infinity(), "");
  r.samples["draws"] = {0.25, 0.5};
  r.wall_seconds = 0.125;
  return r;
}

}  // namespace

TEST_CASE("format_number round-trips doubles") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const double x = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.below(200)) - 100);
    CHECK(std::stod(format_number(x)) == x);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(3.0) == "3");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("series rows must match the columns; references survive more series") {
  ExperimentReport r;
  auto& first = r.add_series("a", {"x"});
  for (int i = 0; i < 50; ++i) r.add_series("s" + std::to_string(i), {"y"});
  first.add({1.0});
  CHECK(r.find_series("a").rows.size() == 1);
  CHECK_THROWS_AS(first.add({1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS(r.find_series("missing"));
  CHECK(r.find_series("a").column("x") == std::vector<double>{1.0});
}

TEST_CASE("checks drive passed()") {
  auto r = sample_report();
  CHECK_FALSE(r.passed());
  CHECK(r.check("ok").pass);
  r.checks.pop_back();
  CHECK(r.passed());
}

TEST_CASE("JSON round trip preserves the report") {
  const auto r = sample_report();
  const auto text = r.to_json();
  const auto back = report_from_json(text);
  CHECK(back.experiment == "demo");
  CHECK(back.seed == 42);
  REQUIRE(back.parameters.size() == 2);
  CHECK(back.parameters[1].value == "8, 16");
  CHECK(std::isnan(back.find_series("curve").rows[1][1]));
  CHECK(std::isinf(back.check("bad").value));
  CHECK(back.fit("slope").resamples == 400);
  CHECK(back.samples.at("draws").size() == 2);
  CHECK(back.to_json() == text);
}

TEST_CASE("CSV has key=value headers and no timestamps") {
  const auto r = sample_report();
  const auto csv = r.to_csv(r.find_series("curve"));
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> header, body;
  while (std::getline(in, line)) (line.rfind("# ", 0) == 0 ? header : body).push_back(line);
  CHECK(header.front() == "# experiment=demo");
  bool has_seed = false;
  for (const auto& h : header) {
    CHECK(h.find('=') != std::string::npos);
    CHECK(h.find("time") == std::string::npos);
    has_seed = has_seed || h == "# seed=42";
  }
  CHECK(has_seed);
  REQUIRE(body.size() == 3);
  CHECK(body[0] == "x,y");
  CHECK(body[1] == "1,0.1");
  CHECK(body[2] == "2,nan");
}

TEST_CASE("write() produces the JSON and one CSV per series") {
  const auto dir = std::filesystem::temp_directory_path() / "landloc_report_test";
  std::filesystem::remove_all(dir);
  const auto paths = sample_report().write(dir);
  REQUIRE(paths.size() == 2);
  CHECK(std::filesystem::exists(dir / "demo.json"));
  CHECK(std::filesystem::exists(dir / "demo_curve.csv"));
  std::ifstream f(dir / "demo.json");
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(report_from_json(ss.str()).experiment == "demo");
  std::filesystem::remove_all(dir);
}

TEST_CASE("config_text reproduces a run") {
  const auto* e = experiments::find_experiment("perc-crossing");
  const experiments::Context ctx{11, 1};
  const auto a = experiments::run(*e, {{"trials", "50"}, {"ells", "4, 8"}}, ctx);
  const auto cfg = config::load_config(std::string_view{a.config_text()});
  CHECK(cfg.seed == 11);
  const auto b = experiments::run(*e, cfg.sections.at("perc-crossing"), {cfg.seed, 1});
  REQUIRE(a.series.size() == b.series.size());
  for (std::size_t i = 0; i < a.series.size(); ++i) CHECK(a.to_csv(a.series[i]) == b.to_csv(b.series[i]));
}
