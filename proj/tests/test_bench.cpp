#include <cmath>
#include <filesystem>

#include "bhk/experiments.hpp"
#include "bhk/operators.hpp"
#include "bhk/presets.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bhk;
namespace fs = std::filesystem;

namespace {

std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> t;
  for (int i = 0; i < n; ++i) t.push_back(a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
  return t;
}

}  // namespace

TEST_CASE("exponent fits") {
  const auto t = logspace(1e-2, 1.0, 20);
  std::vector<double> v, c(t.size(), 3.0);
  for (double x : t) v.push_back(2.0 / std::sqrt(x));
  const auto f = fit_exponent(t, v, 1e-2, 1.0);
  CHECK(std::abs(f.slope + 0.5) < 1e-6);
  CHECK(std::exp(f.intercept) == doctest::Approx(2.0));
  CHECK(f.stderr_slope >= 0.0);
  CHECK(f.count == 20);
  CHECK(std::abs(fit_exponent(t, c, 1e-2, 1.0).slope) < 1e-6);

  std::vector<std::pair<double, double>> series;
  for (std::size_t i = 0; i < t.size(); ++i) series.emplace_back(t[i], v[i]);
  CHECK(fit_exponent(series, 0.05, 1.0).slope == doctest::Approx(-0.5));
  CHECK(fit_exponent(series, 0.05, 1.0).count < 20);

  std::vector<double> bad = v;
  bad[3] = 0.0;
  CHECK_THROWS_AS(fit_exponent(t, bad, 1e-2, 1.0), DomainError);
  CHECK_THROWS_AS(fit_exponent(t, v, 0.5, 0.6), DomainError);
  CHECK_THROWS_AS(fit_exponent(t, v, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(fit_exponent(t, std::vector<double>(3, 1.0), 1e-2, 1.0), DomainError);
}

TEST_CASE("heat decay of a Gaussian in the first-order Besov norm") {
  const Grid g = make_grid(2, 256, 16.0);
  const Field f = preset_field("gaussian", {{"sigma", 0.25}}, g);
  const auto t = logspace(1e-2, 1.0, 21);
  std::vector<double> v;
  for (double x : t) v.push_back(besov_wh_norm(heat(f, x), {0.0, 2.0, inf, 1.0, inf}).aggregate);
  const auto fit = fit_exponent(t, v, 1e-2, 1.0);
  MESSAGE("slope " << fit.slope);
  CHECK(fit.slope <= -0.4);
}

TEST_CASE("experiment configuration") {
  const auto cfg = ExperimentConfig::parse(
      "[experiment]\nname = norms\nseed = 42\n\n[grid]\nN = 128\nL = 16\n\n[space]\nq = inf\nlist = 1, 2.5 ,3\n"
      "flag = yes\n\n[input]\nparams = a=1, core=0\nfield = data/f.bhf\n",
      "/base");
  CHECK(cfg.name() == "norms");
  CHECK(cfg.seed() == 42);
  CHECK(cfg.integer("grid.N") == 128);
  CHECK(cfg.number("grid.L") == 16.0);
  CHECK(std::isinf(cfg.number("space.q")));
  CHECK(cfg.numbers("space.list") == std::vector<double>{1.0, 2.5, 3.0});
  CHECK(cfg.flag("space.flag", false));
  const auto kv = cfg.assignments("input.params");
  CHECK(kv.at("a") == 1.0);
  CHECK(kv.at("core") == 0.0);
  CHECK(cfg.path("input.field") == fs::path("/base/data/f.bhf"));
  CHECK(cfg.number("grid.n", 2.0) == 2.0);
  CHECK(cfg.integers("space.js", {0, 1}) == std::vector<int>{0, 1});
  CHECK(cfg.resolved().at("grid").at("n") == 2.0);
  CHECK(cfg.resolved().at("space").at("q") == "inf");
  CHECK_NOTHROW(cfg.reject_unused());

  SUBCASE("errors carry the key path") {
    const auto c = ExperimentConfig::parse("[experiment]\nname = norms\n\n[space]\np = two\nalpah = 1\nn = 1.5\n");
    CHECK_THROWS_WITH_AS(c.number("space.p"), "space.p: expected a number, got 'two'", ConfigError);
    CHECK_THROWS_WITH_AS(c.integer("space.n"), "space.n: expected an integer", ConfigError);
    CHECK_THROWS_WITH_AS(c.number("space.alpha"), "space.alpha: required key missing", ConfigError);
    c.name();
    c.text("space.p");
    c.text("space.n");
    CHECK_THROWS_WITH_AS(c.reject_unused(), "space.alpah: unknown key for experiment 'norms'", ConfigError);
  }
  SUBCASE("malformed files") {
    CHECK_THROWS_WITH_AS(ExperimentConfig::parse("[grid]\nN = 64\n"), "experiment.name: required key missing",
                         ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[experiment\nname = x\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[experiment]\nname = x\nseed = -3\n").seed(), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("[experiment]\nname = x\n[a]\nb = c=d\n").assignments("a.b"),
                    ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/bhk.ini"), ConfigError);
  }
}

TEST_CASE("reports") {
  Report r("demo", 7);
  r.add_series("curve", {1.0, 2.0}, {0.5, 0.25});
  r.add_point("curve", 3.0, inf);
  CHECK(r.check("a", 1.0, "<=", 1.0).pass);
  CHECK_FALSE(r.check("b", 2.0, "<", 1.0).pass);
  CHECK(r.check("c", 2.0, ">", 1.0).pass);
  CHECK_FALSE(r.passed());
  CHECK_THROWS_AS(r.check("d", 1.0, "==", 1.0), DomainError);
  CHECK_THROWS_AS(r.add_series("x", {1.0}, {}), DomainError);
  r.info()["note"] = "value";

  const auto dir = bhk::test::scratch("report_a");
  fs::remove_all(dir);
  r.write(dir, 0.5);
  for (const char* f : {"summary.json", "series.csv", "meta.json"}) CHECK(fs::exists(dir / f));
  const auto back = nlohmann::ordered_json::parse(read_text(dir / "summary.json"));
  CHECK(back == r.summary());
  CHECK(back["pass"] == false);
  CHECK(back["seed"] == 7);
  CHECK(back["assertions"].size() == 3);
  CHECK(read_text(dir / "series.csv").rfind("series,x,y\ncurve,", 0) == 0);

  const auto dir2 = bhk::test::scratch("report_b");
  fs::remove_all(dir2);
  r.write(dir2, 9.0);
  CHECK(sha256_file(dir / "series.csv") == sha256_file(dir2 / "series.csv"));
  CHECK(sha256_file(dir / "summary.json") == sha256_file(dir2 / "summary.json"));
  CHECK(sha256_file(dir / "series.csv").size() == 64);

  CHECK(series_csv({}) == "series,x,y\n");
  const Report empty("none", 1);
  CHECK(empty.passed());
  CHECK_THROWS_AS(read_text(dir / "missing.txt"), FormatError);
}

TEST_CASE("corpus and ceilings") {
  const Grid a = make_grid(2, 128, 16.0), b = make_grid(2, 256, 16.0);
  CorpusSpec c;
  c.seed = 5;
  CHECK(corpus_field(a, c, 3).values() == corpus_field(a, c, 3).values());
  CHECK(corpus_field(a, c, 3).values() != corpus_field(a, c, 4).values());
  CHECK(divergence_defect(corpus_field(a, c, 2, 2)) < 1e-10);
  CHECK(common_jrange(a, b).lo == b.j_min);
  CHECK(common_jrange(a, b).hi == a.j_max);
  CHECK(common_krange(a, b).hi == std::min(a.k_max, b.k_max));

  const auto checks = calibrate_ceilings(
      [](const Grid& g) {
        return RatioSet{{"steady", g.N == 128 ? 1.0 : 1.1}, {"drifting", g.N == 128 ? 1.0 : 1.6}, {"zero", 0.0}};
      },
      a, b);
  REQUIRE(checks.size() == 3);
  for (const auto& ch : checks) {
    if (ch.name == "steady") {
      CHECK(ch.ceiling == 1.5);
      CHECK(ch.drift == doctest::Approx(0.1));
      CHECK(ch.pass);
    } else if (ch.name == "drifting") {
      CHECK_FALSE(ch.stable);
      CHECK_FALSE(ch.pass);
    } else {
      CHECK(ch.pass);
    }
  }
}

TEST_CASE("experiment runner") {
  CHECK(experiment_names().size() == 12);
  const auto out = bhk::test::scratch("runner_norms");
  fs::remove_all(out);
  auto cfg = ExperimentConfig::parse(
      "[experiment]\nname = norms\nseed = 3\n\n[grid]\nN = 128\n\n[input]\npreset = power\nparams = a=1\n");
  RunOptions opts;
  opts.out = out;
  const auto res = run_experiment(cfg, opts);
  CHECK(res.exit_code == 0);
  CHECK(res.out_dir == out);
  CHECK(fs::exists(out / "summary.json"));
  const auto sum = nlohmann::json::parse(read_text(out / "summary.json"));
  CHECK(sum["pass"] == true);
  CHECK(sum["info"].contains("config"));
  CHECK(sum["info"].contains("grid"));

  opts.seed = 9;
  const auto again = run_experiment(cfg, opts);
  CHECK(again.report.seed() == 9);

  CHECK_THROWS_AS(run_experiment(ExperimentConfig::parse("[experiment]\nname = nope\n")), ConfigError);
  CHECK_THROWS_AS(run_experiment(ExperimentConfig::parse("[experiment]\nname = norms\n\n[grid]\nNN = 3\n"), opts),
                  ConfigError);
}
