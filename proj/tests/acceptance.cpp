#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bhk/experiments.hpp"
#include "bhk/littlewood_paley.hpp"
#include "bhk/norms.hpp"
#include "bhk/operators.hpp"
#include "bhk/presets.hpp"

using namespace bhk;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = BHK_CONFIG_DIR;
const fs::path kOut = fs::temp_directory_path() / "bhk_acceptance";

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void need(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << (ok ? "" : "FAILED ") << what;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// runs one configured experiment into root/<name>; all assertions must pass
RunResult run_config(const std::string& name, const fs::path& root, Outcome& o) {
  RunOptions opts;
  opts.out = root / name;
  RunResult res = run_experiment(ExperimentConfig::load(kConfigs / (name + ".ini")), opts);
  int failed = 0;
  for (const auto& a : res.report.assertions())
    if (!a.pass) {
      ++failed;
      o.need(false, name + "." + a.name + " = " + num(a.measured) + " " + a.relation + " " + num(a.bound));
    }
  if (failed == 0) o.need(true, name + " " + std::to_string(res.report.assertions().size()) + " assertions");
  return res;
}

const Assertion* find_assertion(const RunResult& r, const std::string& name) {
  for (const auto& a : r.report.assertions())
    if (a.name == name) return &a;
  return nullptr;
}

void report_value(Outcome& o, const RunResult& r, const std::string& name) {
  const Assertion* a = find_assertion(r, name);
  if (!a)
    o.need(false, name + " missing");
  else
    o.detail << "; " << name << "=" << num(a->measured);
}

Field with_symbol(const Field& f, const std::vector<double>& sym) {
  auto s = spectra(f);
  for (auto& c : s)
    for (std::size_t m = 0; m < c.size(); ++m) c[m] *= sym[m];
  return from_spectra(f.grid(), std::move(s));
}

double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

Field band(const Grid& g, int j, double seed) {
  return preset_field("random_bandlimited", {{"j", j}, {"seed", seed}}, g);
}

void criterion1(Outcome& o) {
  const Grid g = make_grid(2, 256, 16.0);
  auto t0 = std::chrono::steady_clock::now();
  const double w = weak_lp(preset_field("power", {{"a", 1.0}}, g), 2.0);
  const double t_power = seconds_since(t0);
  const double e1 = std::abs(w / std::sqrt(M_PI) - 1.0);
  o.need(e1 < 0.03, "power anchor rel err " + num(e1) + " < 0.03");
  o.need(t_power < 1.0, "power time " + num(t_power) + "s < 1s");
  t0 = std::chrono::steady_clock::now();
  const double wi = weak_lp(preset_field("annulus_indicator", {{"k", 0}}, g), 2.0);
  const double t_ind = seconds_since(t0);
  const double e2 = std::abs(wi / std::sqrt(0.75 * M_PI) - 1.0);
  o.need(e2 < 0.02, "indicator anchor rel err " + num(e2) + " < 0.02");
  o.need(t_ind < 1.0, "indicator time " + num(t_ind) + "s < 1s");
}

void criterion2(Outcome& o) {
  const Grid g = make_grid(2, 256, 16.0);
  const auto fam = build_bump(g);
  o.need(fam->partition_defect() < 1e-12, "partition defect " + num(fam->partition_defect()));

  const Field f = band(g, 0, 11) + band(g, 1, 12) + band(g, 2, 13);
  double orth = 0.0;
  for (int j = g.j_min; j <= g.j_max; ++j)
    for (int k = g.j_min; k <= g.j_max; ++k)
      if (std::abs(j - k) >= 2) orth = std::max(orth, lp_block(lp_block(f, k), j).max_abs());
  o.need(orth < 1e-10, "block orthogonality " + num(orth));

  const Field h = band(g, -1, 21) + band(g, 1, 22) + band(g, 3, 23);
  double para = 0.0;
  for (int k = fam->j_ext_min() + 2; k <= fam->j_ext_max(); ++k) {
    const Field prod = dealiased_product(with_symbol(h, fam->lowpass_symbol(k - 2)), with_symbol(f, fam->symbol(k)));
    for (int j = fam->j_ext_min(); j <= fam->j_ext_max(); ++j)
      if (std::abs(j - k) >= 5) para = std::max(para, with_symbol(prod, fam->symbol(j)).max_abs());
  }
  o.need(para < 1e-10, "paraproduct localisation " + num(para));

  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick(g.j_min, g.j_max - 1);
  double bony_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Field a = band(g, pick(rng), 100 + i), b = band(g, pick(rng), 200 + i);
    const auto parts = bony(a, b);
    const Field sum = parts.low_high + parts.high_low + parts.resonant;
    bony_err = std::max(bony_err, max_diff(sum, dealiased_product(a, b)) / (a.max_abs() * b.max_abs()));
  }
  o.need(bony_err < 1e-10, "Bony reconstruction on 20 pairs " + num(bony_err));
}

void criterion3(Outcome& o) {
  const Grid g = make_grid(2, 256, 16.0);
  std::vector<int> js;
  for (int j = g.j_min; j <= g.j_max; ++j) js.push_back(j);
  std::vector<double> times;
  for (int i = 0; i < 21; ++i) times.push_back(0.01 * std::pow(100.0, i / 20.0));
  for (double sigma : {1.0, 2.0}) {
    const auto env = heat_envelope(g, {0.0, 2.0, inf, sigma, inf}, 0.0, js, times, 0.01, 1.0);
    const double claim = -sigma / 2.0;
    o.need(std::abs(env.fit.slope - claim) <= 0.1,
           "sigma=" + num(sigma) + " slope " + num(env.fit.slope) + " vs " + num(claim));
  }
}

void criterion4(Outcome& o) {
  const auto ceil = nlohmann::json::parse(read_text(kConfigs / "ceilings.json"));
  double worst = 0.0;
  int count = 0;
  for (const auto& [exp, entries] : ceil.items())
    for (const auto& [name, e] : entries.items()) {
      const double c = e.at("coarse").get<double>(), fi = e.at("fine").get<double>();
      const double drift = c == 0.0 ? (fi == 0.0 ? 0.0 : inf) : std::abs(fi - c) / c;
      worst = std::max(worst, drift);
      ++count;
      if (drift > 0.2) o.need(false, exp + "." + name + " drift " + num(drift));
    }
  o.need(worst <= 0.2, std::to_string(count) + " ceilings, worst N=128/256 drift " + num(worst));
  for (const char* name :
       {"embeddings", "holder", "multiplier-bound", "convolution-bound", "heat-decay", "bilinear-k"})
    run_config(name, kOut / "run1", o);
}

void criterion5(Outcome& o) {
  const Grid g = make_grid(2, 256, 16.0);
  const double p = 2.0;
  const Field one = preset_field("strictness_witness", {{"p", p}, {"m", 1}}, g);
  const double w1 = weak_lp(one, p), wk1 = weak_herz_norm(one, {0.0, p, inf}).aggregate;
  double growth = inf, bound = 0.0;
  for (int m = 2; m <= 4; ++m) {
    const Field f = preset_field("strictness_witness", {{"p", p}, {"m", m}}, g);
    growth = std::min(growth, weak_lp(f, p) / (std::pow(m, 1.0 / p) / 2.0 * w1));
    bound = std::max(bound, weak_herz_norm(f, {0.0, p, inf}).aggregate / wk1);
  }
  o.need(growth >= 1.0, "weak-Lp growth over m^{1/p}/2, worst " + num(growth));
  o.need(bound <= 1.0001, "weak-Herz profile ratio to m=1, worst " + num(bound));
  std::vector<Ball> balls;
  for (double r : {0.25, 0.5, 1.0, 2.0, 4.0}) balls.push_back(Ball{{0, 0, 0}, r});
  const auto rep = morrey_refinement(
      [](const Grid& gg) { return preset_field("power", {{"a", 1.0}, {"core", 0.0}}, gg); }, g, 2.0, 4.0, balls);
  o.need(rep.refinement >= 1.2, "Morrey refinement " + num(rep.refinement) + " >= 1.2");
}

void criterion6(Outcome& o) {
  const auto r = run_config("solve", kOut / "run1", o);
  for (const char* a : {"iterations", "contraction_ratio", "fixed_point_residual", "reference_rel_l2"})
    report_value(o, r, a);
}

void criterion7(Outcome& o) {
  const auto c = run_config("criticality-sweep", kOut / "run1", o);
  report_value(o, c, "log_ratio_lambda0.5");
  report_value(o, c, "log_ratio_lambda2");
  const auto s = run_config("self-similar", kOut / "run1", o);
  report_value(o, s, "solution_max_discrepancy");
}

void criterion8(Outcome& o) {
  const auto w = run_config("weakstar", kOut / "run1", o);
  report_value(o, w, "pairing_slope");
  const auto a = run_config("asymptotic", kOut / "run1", o);
  report_value(o, a, "final_over_initial");
}

void criterion9(Outcome& o) {
  run_config("norms", kOut / "run1", o);
  int same = 0, total = 0;
  for (const auto& name : experiment_names()) {
    Outcome quiet;
    run_config(name, kOut / "run2", quiet);
    const fs::path a = kOut / "run1" / name / "series.csv", b = kOut / "run2" / name / "series.csv";
    ++total;
    if (!fs::exists(a) || !fs::exists(b)) {
      o.need(false, name + " series missing");
      continue;
    }
    if (sha256_file(a) == sha256_file(b))
      ++same;
    else
      o.need(false, name + " series.csv hash differs");
  }
  o.need(same == total, std::to_string(same) + "/" + std::to_string(total) + " series.csv hashes identical");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string title;
    double budget;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> all = {
      {1, "norm anchors", 2.0, criterion1},
      {2, "dyadic identities", 10.0, criterion2},
      {3, "heat rates", 30.0, criterion3},
      {4, "frozen ceilings", 300.0, criterion4},
      {5, "strictness and Morrey witnesses", 30.0, criterion5},
      {6, "mild solution", 600.0, criterion6},
      {7, "criticality and self-similarity", 300.0, criterion7},
      {8, "weak-* rate and asymptotics", 300.0, criterion8},
      {9, "determinism", 1800.0, criterion9},
  };
  fs::remove_all(kOut);
  fs::create_directories(kOut);
  int failures = 0;
  for (const auto& c : all) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.need(false, std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    o.need(secs < c.budget, "time " + num(secs) + "s < " + num(c.budget) + "s");
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title << ") [" << num(secs)
              << " s]: " << o.detail.str() << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
