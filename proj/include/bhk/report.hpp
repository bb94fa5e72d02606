#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace bhk {

struct Assertion {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  std::string relation;  // "<=", ">=", "<", ">"
  bool pass = false;
};

struct SeriesRow {
  std::string series;
  double x = 0.0, y = 0.0;
};

class Report {
 public:
  Report() = default;
  Report(std::string experiment, std::uint64_t seed) : experiment_(std::move(experiment)), seed_(seed) {}

  const std::string& experiment() const { return experiment_; }
  std::uint64_t seed() const { return seed_; }

  void add_point(const std::string& series, double x, double y) { rows_.push_back({series, x, y}); }
  void add_series(const std::string& series, const std::vector<double>& x, const std::vector<double>& y);
  const Assertion& check(const std::string& name, double measured, const std::string& relation, double bound);
  // arbitrary JSON under "info"
  nlohmann::ordered_json& info() { return info_; }
  const nlohmann::ordered_json& info() const { return info_; }
  nlohmann::ordered_json& ceilings() { return ceilings_; }

  const std::vector<Assertion>& assertions() const { return assertions_; }
  const std::vector<SeriesRow>& rows() const { return rows_; }
  bool passed() const;

  nlohmann::ordered_json summary() const;
  // summary.json, series.csv, meta.json (timestamps and runtime only)
  void write(const std::filesystem::path& dir, double runtime_seconds) const;

 private:
  std::string experiment_;
  std::uint64_t seed_ = 0;
  std::vector<Assertion> assertions_;
  std::vector<SeriesRow> rows_;
  nlohmann::ordered_json info_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json ceilings_ = nlohmann::ordered_json::object();
};

std::string series_csv(const std::vector<SeriesRow>& rows);
std::string format_double(double v);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
// hex SHA-256 of a file's bytes
std::string sha256_file(const std::filesystem::path& path);

}  // namespace bhk
