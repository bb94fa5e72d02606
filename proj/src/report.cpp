#include "bhk/report.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "bhk/grid.hpp"

namespace bhk {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

nlohmann::ordered_json json_number(double v) {
  if (!std::isfinite(v)) return format_double(v);
  return v;
}

}  // namespace

void Report::add_series(const std::string& series, const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DomainError("report series '" + series + "': x and y lengths differ");
  for (std::size_t i = 0; i < x.size(); ++i) add_point(series, x[i], y[i]);
}

const Assertion& Report::check(const std::string& name, double measured, const std::string& relation, double bound) {
  Assertion a{name, measured, bound, relation, false};
  if (relation == "<=")
    a.pass = measured <= bound;
  else if (relation == "<")
    a.pass = measured < bound;
  else if (relation == ">=")
    a.pass = measured >= bound;
  else if (relation == ">")
    a.pass = measured > bound;
  else
    throw DomainError("unknown assertion relation " + relation);
  assertions_.push_back(a);
  return assertions_.back();
}

bool Report::passed() const {
  for (const auto& a : assertions_)
    if (!a.pass) return false;
  return true;
}

nlohmann::ordered_json Report::summary() const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment_;
  j["seed"] = seed_;
  j["pass"] = passed();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& a : assertions_)
    arr.push_back({{"name", a.name},
                   {"measured", json_number(a.measured)},
                   {"relation", a.relation},
                   {"bound", json_number(a.bound)},
                   {"pass", a.pass}});
  j["assertions"] = arr;
  j["ceilings"] = ceilings_;
  j["info"] = info_;
  return j;
}

std::string series_csv(const std::vector<SeriesRow>& rows) {
  std::string out = "series,x,y\n";
  for (const auto& r : rows) out += r.series + "," + format_double(r.x) + "," + format_double(r.y) + "\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Report::write(const std::filesystem::path& dir, double runtime_seconds) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create output directory " + dir.string() + ": " + ec.message());
  write_text(dir / "summary.json", summary().dump(2) + "\n");
  write_text(dir / "series.csv", series_csv(rows_));
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  nlohmann::ordered_json meta;
  meta["experiment"] = experiment_;
  meta["created_utc"] = stamp;
  meta["runtime_seconds"] = runtime_seconds;
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

std::string sha256_file(const std::filesystem::path& path) {
  const std::string data = read_text(path);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr)) throw FormatError("sha256 failed");
  std::string hex;
  char b[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex += b;
  }
  return hex;
}

}  // namespace bhk
