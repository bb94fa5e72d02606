#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace bhk {

// INI-style experiment configuration; keys are "section.name"
class ExperimentConfig {
 public:
  static ExperimentConfig load(const std::filesystem::path& path);
  static ExperimentConfig parse(const std::string& text, const std::filesystem::path& base_dir = ".");

  std::string name() const;
  std::uint64_t seed() const;
  const std::filesystem::path& base_dir() const { return base_; }

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& def) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double def) const;
  int integer(const std::string& key) const;
  int integer(const std::string& key, int def) const;
  bool flag(const std::string& key, bool def) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& def) const;
  std::vector<int> integers(const std::string& key, const std::vector<int>& def) const;
  // "a=1,b=2"
  std::map<std::string, double> assignments(const std::string& key) const;
  std::filesystem::path path(const std::string& key) const;

  // error on keys never read
  void reject_unused() const;
  // every key read, with the value used (defaults included)
  const nlohmann::ordered_json& resolved() const { return resolved_; }

 private:
  std::optional<std::string> raw(const std::string& key) const;
  void record(const std::string& key, const nlohmann::ordered_json& v) const;

  std::map<std::string, std::string> values_;
  std::filesystem::path base_ = ".";
  mutable std::set<std::string> used_;
  mutable nlohmann::ordered_json resolved_ = nlohmann::ordered_json::object();
};

double parse_number(const std::string& s, const std::string& key);

}  // namespace bhk
