#pragma once

// Key-value run configuration. Format:
//
//   # comment
//   seed = 7            top-level keys: seed, jobs, out
//   [wegner]            one section per experiment
//   trials = 500
//   deltas = 0.02, 0.05, 0.1
//
// Experiments read their section through a ParamReader, which supplies
// defaults, validates ranges, records the materialized values for the report
// and rejects keys nobody asked for.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "landloc/report.hpp"

namespace landloc::config {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string field = {}, int line = 0)
      : std::runtime_error(what), field_(std::move(field)), line_(line) {}
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

using Section = std::map<std::string, std::string>;

struct ConfigFile {
  Section global;
  std::map<std::string, Section> sections;
};

/// Throws ConfigError carrying the 1-based line number on malformed input.
ConfigFile parse_config(std::string_view text);
ConfigFile load_config_file(const std::filesystem::path& path);

struct RunConfig {
  std::uint64_t seed = 20240601;
  unsigned jobs = 1;
  std::string out = "reports";
  std::map<std::string, Section> sections;
  /// Overrides without a section prefix; applied to whichever experiment
  /// runs (by `all`: to every experiment that knows the key).
  Section unscoped;
};

/// Builds a RunConfig from an optional file plus "key=value" or
/// "section.key=value" overrides (later ones win).
RunConfig load_config(const std::filesystem::path* file, const std::vector<std::string>& overrides);
RunConfig load_config(std::string_view text, const std::vector<std::string>& overrides = {});

class ParamReader {
 public:
  explicit ParamReader(std::string section, Section values = {});

  double real(const std::string& key, double def);
  double real_in(const std::string& key, double def, double lo, double hi);
  double positive(const std::string& key, double def);
  std::int64_t integer(const std::string& key, std::int64_t def, std::int64_t lo = INT64_MIN,
                       std::int64_t hi = INT64_MAX);
  std::vector<double> reals(const std::string& key, std::vector<double> def, double lo = -1e300,
                            double hi = 1e300);
  std::vector<std::int64_t> integers(const std::string& key, std::vector<std::int64_t> def,
                                     std::int64_t lo = INT64_MIN, std::int64_t hi = INT64_MAX);
  bool flag(const std::string& key, bool def);
  std::string choice(const std::string& key, std::string def, const std::vector<std::string>& allowed);

  /// Throws ConfigError naming the first key that was never read.
  void finish() const;
  /// True if the section supplies `key` (read or not).
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::vector<ParamEntry>& entries() const noexcept { return entries_; }
  const std::string& section() const noexcept { return section_; }

 private:
  const std::string* raw(const std::string& key);
  void record(const std::string& key, std::string value);
  [[noreturn]] void fail(const std::string& key, const std::string& why) const;

  std::string section_;
  Section values_;
  std::map<std::string, bool> used_;
  std::vector<ParamEntry> entries_;
};

}  // namespace landloc::config
