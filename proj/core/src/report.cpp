#include "landloc/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "landloc/rng.hpp"

namespace landloc {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, end);
}

void Series::add(std::vector<double> row) {
  if (row.size() != columns.size())
    throw std::invalid_argument("Series " + name + ": row has " + std::to_string(row.size()) +
                                " entries, expected " + std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

std::vector<double> Series::column(const std::string& col) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] != col) continue;
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
  throw std::out_of_range("Series " + name + ": no column " + col);
}

Series& ExperimentReport::add_series(std::string name, std::vector<std::string> columns) {
  series.push_back(Series{std::move(name), std::move(columns), {}});
  return series.back();
}

const Series& ExperimentReport::find_series(const std::string& name) const {
  for (const auto& s : series)
    if (s.name == name) return s;
  throw std::out_of_range("report " + experiment + ": no series " + name);
}

const FittedValue& ExperimentReport::fit(const std::string& name) const {
  for (const auto& f : fits)
    if (f.name == name) return f;
  throw std::out_of_range("report " + experiment + ": no fit " + name);
}

void ExperimentReport::add_check(std::string name, bool pass, double value, std::string detail) {
  checks.push_back(Check{std::move(name), pass, value, std::move(detail)});
}

const Check& ExperimentReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("report " + experiment + ": no check " + name);
}

bool ExperimentReport::passed() const noexcept {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string ExperimentReport::config_text() const {
  std::ostringstream os;
  os << "seed = " << seed << "\n[" << experiment << "]\n";
  for (const auto& p : parameters) os << p.key << " = " << p.value << "\n";
  return os.str();
}

namespace {

json number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

double read_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  throw std::runtime_error("report: bad number " + s);
}

}  // namespace

std::string ExperimentReport::to_json() const {
  json j;
  j["schema"] = "landloc.report";
  j["schema_version"] = kReportSchemaVersion;
  j["experiment"] = experiment;
  j["generator"] = kGeneratorId;
  j["rng"] = std::string(Rng::algorithm);
  j["seed"] = seed;
  json params = json::object();
  for (const auto& p : parameters) params[p.key] = p.value;
  j["parameters"] = params;
  j["config"] = config_text();
  json ser = json::array();
  for (const auto& s : series) {
    json rows = json::array();
    for (const auto& r : s.rows) {
      json row = json::array();
      for (double x : r) row.push_back(number(x));
      rows.push_back(row);
    }
    ser.push_back({{"name", s.name}, {"columns", s.columns}, {"rows", rows}});
  }
  j["series"] = ser;
  json fs = json::array();
  for (const auto& f : fits)
    fs.push_back({{"name", f.name},
                  {"value", number(f.value)},
                  {"ci_low", number(f.ci_low)},
                  {"ci_high", number(f.ci_high)},
                  {"resamples", f.resamples},
                  {"note", f.note}});
  j["fits"] = fs;
  json cs = json::array();
  for (const auto& c : checks)
    cs.push_back({{"name", c.name}, {"pass", c.pass}, {"value", number(c.value)}, {"detail", c.detail}});
  j["checks"] = cs;
  json sm = json::object();
  for (const auto& [k, v] : samples) {
    json arr = json::array();
    for (double x : v) arr.push_back(number(x));
    sm[k] = arr;
  }
  j["samples"] = sm;
  j["passed"] = passed();
  j["wall_seconds"] = wall_seconds;
  return j.dump(1);
}

ExperimentReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("schema") != "landloc.report" || j.at("schema_version") != kReportSchemaVersion)
    throw std::runtime_error("report_from_json: schema mismatch");
  ExperimentReport r;
  r.experiment = j.at("experiment").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  // The config text keeps parameter order; the JSON object does not.
  std::istringstream cfg(j.at("config").get<std::string>());
  std::string line;
  while (std::getline(cfg, line)) {
    if (line.empty() || line[0] == '[' || line.rfind("seed = ", 0) == 0) continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    r.parameters.push_back({line.substr(0, eq), line.substr(eq + 3)});
  }
  for (const auto& s : j.at("series")) {
    Series out{s.at("name"), s.at("columns").get<std::vector<std::string>>(), {}};
    for (const auto& row : s.at("rows")) {
      std::vector<double> v;
      for (const auto& x : row) v.push_back(read_number(x));
      out.rows.push_back(std::move(v));
    }
    r.series.push_back(std::move(out));
  }
  for (const auto& f : j.at("fits"))
    r.fits.push_back({f.at("name"), read_number(f.at("value")), read_number(f.at("ci_low")),
                      read_number(f.at("ci_high")), f.at("resamples").get<std::size_t>(),
                      f.at("note")});
  for (const auto& c : j.at("checks"))
    r.checks.push_back({c.at("name"), c.at("pass").get<bool>(), read_number(c.at("value")),
                        c.at("detail")});
  for (const auto& [k, v] : j.at("samples").items()) {
    std::vector<double> xs;
    for (const auto& x : v) xs.push_back(read_number(x));
    r.samples[k] = std::move(xs);
  }
  r.wall_seconds = j.at("wall_seconds").get<double>();
  return r;
}

std::string ExperimentReport::to_csv(const Series& s) const {
  std::ostringstream os;
  os << "# experiment=" << experiment << "\n";
  os << "# series=" << s.name << "\n";
  os << "# schema_version=" << kReportSchemaVersion << "\n";
  os << "# generator=" << kGeneratorId << "\n";
  os << "# seed=" << seed << "\n";
  for (const auto& p : parameters) os << "# " << p.key << "=" << p.value << "\n";
  for (std::size_t c = 0; c < s.columns.size(); ++c) os << (c ? "," : "") << s.columns[c];
  os << "\n";
  for (const auto& r : s.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << format_number(r[c]);
    os << "\n";
  }
  return os.str();
}

std::vector<std::filesystem::path> ExperimentReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::filesystem::path& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << body;
    if (!f) throw std::runtime_error("write failed: " + path.string());
    written.push_back(path);
  };
  put(dir / (experiment + ".json"), to_json());
  for (const auto& s : series) put(dir / (experiment + "_" + s.name + ".csv"), to_csv(s));
  return written;
}

}  // namespace landloc
