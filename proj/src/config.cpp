#include "bhk/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "bhk/grid.hpp"

namespace bhk {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

double parse_number(const std::string& s0, const std::string& key) {
  std::string s = trim(s0);
  std::string low = s;
  std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) { return std::tolower(c); });
  if (low == "inf" || low == "infinity" || low == "+inf") return std::numeric_limits<double>::infinity();
  if (low == "-inf" || low == "-infinity") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || std::isnan(v))
    throw ConfigError(key + ": expected a number, got '" + s0 + "'");
  return v;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::filesystem::path& base_dir) {
  boost::property_tree::ptree pt;
  std::istringstream is(text);
  try {
    boost::property_tree::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig c;
  c.base_ = base_dir;
  for (const auto& [section, body] : pt) {
    if (body.empty()) throw ConfigError(section + ": key outside any section");
    for (const auto& [key, val] : body) c.values_[section + "." + key] = trim(val.data());
  }
  if (!c.has("experiment.name")) throw ConfigError("experiment.name: required key missing");
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

std::string ExperimentConfig::name() const { return text("experiment.name"); }

std::uint64_t ExperimentConfig::seed() const {
  const std::string s = text("experiment.seed", "0");
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos != s.size() || s.empty() || !std::isdigit(static_cast<unsigned char>(s[0]))) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("experiment.seed: expected an unsigned integer, got '" + s + "'");
  }
}

bool ExperimentConfig::has(const std::string& key) const { return values_.count(key) > 0; }

void ExperimentConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

std::optional<std::string> ExperimentConfig::raw(const std::string& key) const {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void ExperimentConfig::record(const std::string& key, const nlohmann::ordered_json& v) const {
  auto dot = key.find('.');
  resolved_[key.substr(0, dot)][key.substr(dot + 1)] = v;
}

std::string ExperimentConfig::text(const std::string& key) const {
  auto v = raw(key);
  if (!v) throw ConfigError(key + ": required key missing");
  record(key, *v);
  return *v;
}

std::string ExperimentConfig::text(const std::string& key, const std::string& def) const {
  auto v = raw(key).value_or(def);
  record(key, v);
  return v;
}

static nlohmann::ordered_json num_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double ExperimentConfig::number(const std::string& key) const {
  auto v = raw(key);
  if (!v) throw ConfigError(key + ": required key missing");
  const double x = parse_number(*v, key);
  record(key, num_json(x));
  return x;
}

double ExperimentConfig::number(const std::string& key, double def) const {
  auto v = raw(key);
  const double x = v ? parse_number(*v, key) : def;
  record(key, num_json(x));
  return x;
}

static int to_int(double x, const std::string& key) {
  if (!std::isfinite(x) || x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError(key + ": expected an integer");
  return static_cast<int>(x);
}

int ExperimentConfig::integer(const std::string& key) const {
  auto v = raw(key);
  if (!v) throw ConfigError(key + ": required key missing");
  const int x = to_int(parse_number(*v, key), key);
  record(key, x);
  return x;
}

int ExperimentConfig::integer(const std::string& key, int def) const {
  auto v = raw(key);
  const int x = v ? to_int(parse_number(*v, key), key) : def;
  record(key, x);
  return x;
}

bool ExperimentConfig::flag(const std::string& key, bool def) const {
  auto v = raw(key);
  bool x = def;
  if (v) {
    std::string low = *v;
    std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) { return std::tolower(c); });
    if (low == "true" || low == "1" || low == "yes" || low == "on")
      x = true;
    else if (low == "false" || low == "0" || low == "no" || low == "off")
      x = false;
    else
      throw ConfigError(key + ": expected a boolean, got '" + *v + "'");
  }
  record(key, x);
  return x;
}

std::vector<double> ExperimentConfig::numbers(const std::string& key) const {
  auto v = raw(key);
  if (!v) throw ConfigError(key + ": required key missing");
  std::vector<double> out;
  for (const auto& s : split(*v, ',')) out.push_back(parse_number(s, key));
  auto arr = nlohmann::ordered_json::array();
  for (double x : out) arr.push_back(num_json(x));
  record(key, arr);
  return out;
}

std::vector<double> ExperimentConfig::numbers(const std::string& key, const std::vector<double>& def) const {
  if (!has(key)) {
    used_.insert(key);
    auto arr = nlohmann::ordered_json::array();
    for (double x : def) arr.push_back(num_json(x));
    record(key, arr);
    return def;
  }
  return numbers(key);
}

std::vector<int> ExperimentConfig::integers(const std::string& key, const std::vector<int>& def) const {
  std::vector<double> d(def.begin(), def.end());
  std::vector<int> out;
  for (double x : numbers(key, d)) out.push_back(to_int(x, key));
  return out;
}

std::map<std::string, double> ExperimentConfig::assignments(const std::string& key) const {
  auto v = raw(key);
  std::map<std::string, double> out;
  if (!v) {
    record(key, "");
    return out;
  }
  for (const auto& item : split(*v, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError(key + ": expected name=value, got '" + item + "'");
    out[trim(item.substr(0, eq))] = parse_number(item.substr(eq + 1), key);
  }
  record(key, *v);
  return out;
}

std::filesystem::path ExperimentConfig::path(const std::string& key) const {
  std::filesystem::path p = text(key);
  return p.is_absolute() ? p : base_ / p;
}

void ExperimentConfig::reject_unused() const {
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) throw ConfigError(k + ": unknown key for experiment '" + values_.at("experiment.name") + "'");
}

}  // namespace bhk
