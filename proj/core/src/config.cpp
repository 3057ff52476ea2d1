#include "landloc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace landloc::config {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc{} && p == e && std::isfinite(out);
}

bool parse_int(const std::string& s, std::int64_t& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc{} && p == e;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) out.push_back(trim(cur));
  return out;
}

void apply_override(RunConfig& cfg, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + item + "' is not key=value");
  const std::string key = trim(std::string_view(item).substr(0, eq));
  const std::string value = trim(std::string_view(item).substr(eq + 1));
  if (!valid_name(key)) throw ConfigError("override '" + item + "': bad key", key);
  const auto dot = key.find('.');
  if (dot == std::string::npos) {
    if (key == "seed" || key == "jobs" || key == "out") {
      if (key == "seed") {
        std::int64_t s;
        if (!parse_int(value, s) || s < 0) throw ConfigError("seed: expected a non-negative integer", "seed");
        cfg.seed = static_cast<std::uint64_t>(s);
      } else if (key == "jobs") {
        std::int64_t j;
        if (!parse_int(value, j) || j < 1) throw ConfigError("jobs: expected a positive integer", "jobs");
        cfg.jobs = static_cast<unsigned>(j);
      } else {
        cfg.out = value;
      }
      return;
    }
    cfg.unscoped[key] = value;
  } else {
    cfg.sections[key.substr(0, dot)][key.substr(dot + 1)] = value;
  }
}

RunConfig from_file(const ConfigFile& f) {
  RunConfig cfg;
  for (const auto& [k, v] : f.global) {
    if (k != "seed" && k != "jobs" && k != "out")
      throw ConfigError("unknown top-level key '" + k + "' (expected seed, jobs, out)", k);
    apply_override(cfg, k + "=" + v);
  }
  cfg.sections = f.sections;
  return cfg;
}

}  // namespace

ConfigFile parse_config(std::string_view text) {
  ConfigFile out;
  Section* current = &out.global;
  std::istringstream is{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header", {}, lineno);
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!valid_name(name))
        throw ConfigError("line " + std::to_string(lineno) + ": bad section name", name, lineno);
      current = &out.sections[name];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value", {}, lineno);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!valid_name(key) || key.find('.') != std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": bad key '" + key + "'", key, lineno);
    if (current->count(key))
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'", key, lineno);
    (*current)[key] = value;
  }
  return out;
}

ConfigFile load_config_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what(), e.field(), e.line());
  }
}

RunConfig load_config(const std::filesystem::path* file, const std::vector<std::string>& overrides) {
  RunConfig cfg = file ? from_file(load_config_file(*file)) : RunConfig{};
  for (const auto& o : overrides) apply_override(cfg, o);
  return cfg;
}

RunConfig load_config(std::string_view text, const std::vector<std::string>& overrides) {
  RunConfig cfg = from_file(parse_config(text));
  for (const auto& o : overrides) apply_override(cfg, o);
  return cfg;
}

ParamReader::ParamReader(std::string section, Section values)
    : section_(std::move(section)), values_(std::move(values)) {}

const std::string* ParamReader::raw(const std::string& key) {
  used_[key] = true;
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

void ParamReader::record(const std::string& key, std::string value) {
  entries_.push_back({key, std::move(value)});
}

void ParamReader::fail(const std::string& key, const std::string& why) const {
  throw ConfigError("[" + section_ + "] " + key + ": " + why, key);
}

double ParamReader::real(const std::string& key, double def) {
  return real_in(key, def, -1e300, 1e300);
}

double ParamReader::real_in(const std::string& key, double def, double lo, double hi) {
  double v = def;
  if (const auto* s = raw(key))
    if (!parse_double(*s, v)) fail(key, "expected a number, got '" + *s + "'");
  if (!(v >= lo && v <= hi))
    fail(key, "must lie in [" + format_number(lo) + ", " + format_number(hi) + "], got " + format_number(v));
  record(key, format_number(v));
  return v;
}

double ParamReader::positive(const std::string& key, double def) {
  double v = def;
  if (const auto* s = raw(key))
    if (!parse_double(*s, v)) fail(key, "expected a number, got '" + *s + "'");
  if (!(v > 0.0)) fail(key, "must be positive, got " + format_number(v));
  record(key, format_number(v));
  return v;
}

std::int64_t ParamReader::integer(const std::string& key, std::int64_t def, std::int64_t lo,
                                  std::int64_t hi) {
  std::int64_t v = def;
  if (const auto* s = raw(key))
    if (!parse_int(*s, v)) fail(key, "expected an integer, got '" + *s + "'");
  if (v < lo || v > hi)
    fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + std::to_string(v));
  record(key, std::to_string(v));
  return v;
}

std::vector<double> ParamReader::reals(const std::string& key, std::vector<double> def, double lo,
                                       double hi) {
  std::vector<double> v = std::move(def);
  if (const auto* s = raw(key)) {
    v.clear();
    for (const auto& item : split_list(*s)) {
      double x;
      if (!parse_double(item, x)) fail(key, "expected a comma-separated list of numbers, got '" + *s + "'");
      v.push_back(x);
    }
  }
  if (v.empty()) fail(key, "list must not be empty");
  std::string text;
  for (double x : v) {
    if (!(x >= lo && x <= hi))
      fail(key, "entries must lie in [" + format_number(lo) + ", " + format_number(hi) + "], got " + format_number(x));
    text += (text.empty() ? "" : ", ") + format_number(x);
  }
  record(key, text);
  return v;
}

std::vector<std::int64_t> ParamReader::integers(const std::string& key, std::vector<std::int64_t> def,
                                                std::int64_t lo, std::int64_t hi) {
  std::vector<std::int64_t> v = std::move(def);
  if (const auto* s = raw(key)) {
    v.clear();
    for (const auto& item : split_list(*s)) {
      std::int64_t x;
      if (!parse_int(item, x)) fail(key, "expected a comma-separated list of integers, got '" + *s + "'");
      v.push_back(x);
    }
  }
  if (v.empty()) fail(key, "list must not be empty");
  std::string text;
  for (auto x : v) {
    if (x < lo || x > hi)
      fail(key, "entries must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + std::to_string(x));
    text += (text.empty() ? "" : ", ") + std::to_string(x);
  }
  record(key, text);
  return v;
}

bool ParamReader::flag(const std::string& key, bool def) {
  bool v = def;
  if (const auto* s = raw(key)) {
    if (*s == "true" || *s == "1" || *s == "yes") v = true;
    else if (*s == "false" || *s == "0" || *s == "no") v = false;
    else fail(key, "expected true or false, got '" + *s + "'");
  }
  record(key, v ? "true" : "false");
  return v;
}

std::string ParamReader::choice(const std::string& key, std::string def,
                                const std::vector<std::string>& allowed) {
  std::string v = std::move(def);
  if (const auto* s = raw(key)) v = *s;
  if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    fail(key, "expected one of {" + list + "}, got '" + v + "'");
  }
  record(key, v);
  return v;
}

void ParamReader::finish() const {
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) throw ConfigError("[" + section_ + "] unknown key '" + k + "'", k);
}

}  // namespace landloc::config
