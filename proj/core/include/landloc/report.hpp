#pragma once

// Experiment reports: parameters, raw samples, tabular series, fitted
// quantities with intervals and named pass/fail checks. Serialized as one
// JSON document plus one CSV file per series.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace landloc {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kGeneratorId = "landloc 0.1.0";

/// Parameter value as written in the config format (already normalized).
struct ParamEntry {
  std::string key;
  std::string value;
};

struct Series {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
  /// Column by name; throws if missing.
  std::vector<double> column(const std::string& col) const;
};

struct FittedValue {
  std::string name;
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t resamples = 0;
  std::string note;
};

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string detail;
};

class ExperimentReport {
 public:
  std::string experiment;
  std::uint64_t seed = 0;
  std::vector<ParamEntry> parameters;
  std::deque<Series> series;  // deque: add_series references stay valid
  std::vector<FittedValue> fits;
  std::vector<Check> checks;
  /// Raw per-trial samples keyed by name.
  std::map<std::string, std::vector<double>> samples;
  double wall_seconds = 0.0;

  Series& add_series(std::string name, std::vector<std::string> columns);
  const Series& find_series(const std::string& name) const;
  void add_fit(FittedValue f) { fits.push_back(std::move(f)); }
  const FittedValue& fit(const std::string& name) const;
  void add_check(std::string name, bool pass, double value, std::string detail = {});
  const Check& check(const std::string& name) const;
  bool passed() const noexcept;

  /// Section text in the config format that reproduces the parameters.
  std::string config_text() const;
  std::string to_json() const;
  /// CSV of one series: "# key=value" header lines (experiment, schema,
  /// generator, seed, each parameter), column names, rows. No timestamps.
  std::string to_csv(const Series& s) const;
  /// Writes <dir>/<experiment>.json and <dir>/<experiment>_<series>.csv;
  /// returns the paths written.
  std::vector<std::filesystem::path> write(const std::filesystem::path& dir) const;
};

ExperimentReport report_from_json(const std::string& text);

/// Shortest round-trip decimal representation.
std::string format_number(double x);

}  // namespace landloc
