#include <cmath>

#include "bhk/fit.hpp"
#include "bhk/mild.hpp"
#include "bhk/operators.hpp"
#include "bhk/presets.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bhk;
using bhk::test::max_diff;

namespace {

const Grid& g64() {
  static const Grid g = make_grid(2, 64, 16.0);
  return g;
}
const Grid& g128() {
  static const Grid g = make_grid(2, 128, 16.0);
  return g;
}

const MildParams& crit() {
  static const MildParams mp = admissible(2, 2.0, inf, 0.0);
  return mp;
}

const double kRho = std::pow(2.0, 0.25);

double rel_l2(const Field& a, const Field& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    const double d = a.values()[i] - b.values()[i];
    num += d * d;
    den += b.values()[i] * b.values()[i];
  }
  return std::sqrt(num / den);
}

Field solenoidal(int j, double seed, const Grid& g = g64()) {
  return preset_field("random_bandlimited", {{"j", j}, {"seed", seed}, {"components", 2}}, g);
}

Field single_mode(const Grid& g, int j) { return preset_field("pure_block", {{"j", j}, {"components", 2}}, g); }

Field vortex_data(double delta, const Grid& g = g64()) {
  return delta * leray_project(preset_field("vortex_pair", {}, g));
}

double heat_quadrature_gap(const Field& u0, double t, double rho, const QuadConfig& q) {
  const auto coarse = geometric_grid_span(1e-4, t, rho);
  const auto dense = geometric_grid_span(1e-4, t, std::pow(rho, 0.1));
  const auto hc = heat_trajectory(u0, coarse), hd = heat_trajectory(u0, dense);
  const Field bc = duhamel_bilinear(hc, hc, t, q), bd = duhamel_bilinear(hd, hd, t, q);
  return max_diff(bc, bd) / std::max(bd.max_abs(), 1e-300);
}

}  // namespace

TEST_CASE("admissible parameters") {
  const auto mp = admissible(3, 2.0, inf, 0.1);
  CHECK(mp.s == doctest::Approx(0.6));
  CHECK(mp.w == doctest::Approx(0.075));
  CHECK(mp.decay_exponent() == doctest::Approx(0.85));
  CHECK(crit().s == 0.0);
  CHECK(crit().w == doctest::Approx(0.25));

  CHECK_THROWS_WITH_AS(admissible(3, 1.5, inf, 0.0), "p ≤ n/2 (requires n/2 < p)", DomainError);
  CHECK_THROWS_WITH_AS(admissible(2, 2.0, inf, 0.5), "α ≥ min{1−n/2p, n/2p} = 0.5", DomainError);
  CHECK_THROWS_WITH_AS(admissible(2, 2.0, 0.5, 0.0), "q < 1 (requires 1 ≤ q ≤ ∞)", DomainError);
  CHECK_THROWS_WITH_AS(admissible(2, 2.0, inf, -0.1), "α < 0 (requires 0 ≤ α)", DomainError);
  CHECK_THROWS_AS(admissible(2, inf, inf, 0.0), DomainError);
  CHECK_THROWS_AS(admissible(4, 3.0, inf, 0.0), DomainError);

  const auto b = beta_diagnostics(crit());
  CHECK(b.weighted_part > 0.0);
  CHECK(b.critical_part > 0.0);
}

TEST_CASE("time grids") {
  const auto tg = geometric_grid(4.0, kRho, 50);
  CHECK(tg.size() == 50);
  CHECK(tg.T() == 4.0);
  CHECK(tg.t_min() == doctest::Approx(4.0 * std::pow(kRho, -49)));
  REQUIRE(tg.find(0.5));
  CHECK(*tg.find(0.5) == 37);
  CHECK_FALSE(tg.find(0.6));
  const auto span = geometric_grid_span(1e-3, 4.0, kRho);
  CHECK(span.t_min() >= 1e-3);
  CHECK(span.t_min() / kRho < 1e-3);
  CHECK_THROWS_AS(geometric_grid(1.0, 2.5, 10), ConfigError);
  CHECK_THROWS_AS(geometric_grid(1.0, 1.0, 10), ConfigError);
  CHECK_THROWS_AS(explicit_grid({0.2, 0.1}), ConfigError);
  CHECK_THROWS_AS(explicit_grid({}), ConfigError);
}

TEST_CASE("Duhamel bilinear term") {
  const Grid& g = g64();
  const auto tg = geometric_grid_span(1e-3, 0.1, kRho);
  const QuadConfig q = default_quad(crit());
  const auto u = heat_trajectory(solenoidal(0, 1), tg), v = heat_trajectory(solenoidal(1, 2), tg);

  SUBCASE("zero and linearity") {
    const auto z = make_trajectory(tg, std::vector<Field>(tg.size(), Field(g, 2)));
    CHECK(duhamel_bilinear(z, v, 0.1, q).max_abs() == 0.0);
    const Field b = duhamel_bilinear(u, v, 0.1, q);
    CHECK(b.max_abs() > 0.0);
    const Field b2 = duhamel_bilinear(scaled(u, 2.0), v, 0.1, q);
    CHECK(max_diff(b2, 2.0 * b) < 1e-12 * b.max_abs());
    CHECK(divergence_defect(b) < 1e-10);
    const auto all = duhamel_all(u, v, q);
    CHECK(max_diff(all.u.back(), b) == 0.0);
  }
  SUBCASE("argument checks") {
    CHECK_THROWS_AS(duhamel_bilinear(u, v, 0.07, q), DomainError);
    const auto other = heat_trajectory(solenoidal(0, 1), geometric_grid_span(1e-3, 0.1, 1.5));
    CHECK_THROWS_AS(duhamel_bilinear(u, other, 0.1, q), DomainError);
  }
  SUBCASE("single divergence-free mode against dense panels") {
    const Field m = single_mode(g, 0);
    const auto coarse = geometric_grid_span(1e-4, 0.1, kRho);
    const auto dense = geometric_grid_span(1e-4, 0.1, std::pow(kRho, 0.1));
    const auto hc = heat_trajectory(m, coarse), hd = heat_trajectory(m, dense);
    const Field bc = duhamel_bilinear(hc, hc, 0.1, q), bd = duhamel_bilinear(hd, hd, 0.1, q);
    // a shear mode is a steady Euler flow: u.grad u = 0
    CHECK(bc.max_abs() < 1e-12);
    CHECK(max_diff(bc, bd) < 1e-6 * std::max(1.0, bd.max_abs()));
  }
  SUBCASE("band-limited data: second-order refinement towards dense panels") {
    const Field d = solenoidal(0, 17);
    const QuadConfig smooth{0.0};
    const double e1 = heat_quadrature_gap(d, 0.1, kRho, smooth);
    const double e2 = heat_quadrature_gap(d, 0.1, std::sqrt(kRho), smooth);
    MESSAGE("dense-panel gap " << e1 << " at rho=2^{1/4}, " << e2 << " at rho=2^{1/8}");
    CHECK(e1 < 1e-3);
    CHECK(e1 / e2 > 3.0);
  }
}

TEST_CASE("X norm") {
  SUBCASE("zero trajectory") {
    const auto tg = geometric_grid(1.0, kRho, 8);
    const auto x = x_norm(make_trajectory(tg, std::vector<Field>(8, Field(g64(), 2))), crit());
    CHECK(x.total == 0.0);
    CHECK(x.part1 == 0.0);
    CHECK(x.part2 == 0.0);
    CHECK(x.part2_curve.size() == 8);
  }
  SUBCASE("weighted part of the rotational heat flow has no trend") {
    const Grid& g = g128();
    const auto tg = geometric_grid(4.0, kRho, 50);
    const Field u0 = leray_project(preset_field("rotational", {}, g));
    const auto x = x_norm(heat_trajectory(u0, tg), crit());
    // below t = h^2 the heat flow does not move the sampled data
    const auto fit = fit_exponent(tg.t, x.part2_curve, g.h() * g.h(), tg.T());
    MESSAGE("part2 slope " << fit.slope);
    CHECK(fit.slope >= -0.1);
    CHECK(fit.slope <= 0.1);
    CHECK(x.total == doctest::Approx(x.part1 + x.part2));

    // lambda = 2: 2 u(2x, 4t) at t_i uses the stored time t_{i+8}
    std::vector<Field> orig, resc;
    std::vector<double> ts;
    const auto ht = heat_trajectory(u0, tg);
    for (std::size_t i = 0; i + 8 < tg.size(); ++i) {
      ts.push_back(tg.t[i]);
      orig.push_back(ht.u[i]);
      resc.push_back(rescale(ht.u[i + 8], 2.0));
    }
    const auto sub = explicit_grid(ts);
    const double a = x_norm(make_trajectory(sub, orig), crit()).total;
    const double b = x_norm(make_trajectory(sub, resc), crit()).total;
    CHECK(std::abs(b / a - 1.0) < 0.1);
  }
}

TEST_CASE("Picard iteration") {
  const Grid& g = g64();
  const auto tg = geometric_grid(0.5, kRho, 30);
  PicardOptions opts;
  opts.tol = 1e-8;
  opts.max_iter = 20;

  SUBCASE("zero data") {
    const auto tr = picard_solve(Field(g, 2), crit(), tg, opts);
    CHECK(tr.converged);
    CHECK(tr.iterations == 1);
    REQUIRE(tr.history.size() == 1);
    CHECK(tr.history[0] == 0.0);
    for (const auto& f : tr.u) CHECK(f.max_abs() == 0.0);
  }
  SUBCASE("small vortex pair") {
    const Field u0 = vortex_data(0.5);
    const auto tr = picard_solve(u0, crit(), tg, opts);
    MESSAGE("iterations " << tr.iterations << " contraction " << tr.contraction);
    REQUIRE(tr.converged);
    CHECK(tr.contraction < 0.9);
    CHECK(tr.warnings.empty());
    for (const auto& f : tr.u) CHECK(divergence_defect(f) < 1e-10);
    CHECK(fixed_point_residual(tr, u0, crit(), default_quad(crit())) < 2.0 * opts.tol);

    const auto ref = reference_solve(u0, explicit_grid({0.5}), {2e-3, true, 1.0});
    const double err = rel_l2(tr.u.back(), ref.u[0]);
    MESSAGE("reference rel L2 " << err);
    CHECK(err < 1e-3);

    PicardOptions other = opts;
    other.zero_start = true;
    CHECK(x_distance(tr, picard_solve(u0, crit(), tg, other), crit()) < 5.0 * opts.tol);
    other.zero_start = false;
    std::vector<Field> half;
    for (const auto& f : heat_trajectory(u0, tg).u) half.push_back(0.5 * f);
    other.start = half;
    CHECK(x_distance(tr, picard_solve(u0, crit(), tg, other), crit()) < 5.0 * opts.tol);
  }
  SUBCASE("non-solenoidal data is projected") {
    const Field raw = 0.3 * preset_field("rotational", {}, g);
    PicardOptions few = opts;
    few.max_iter = 2;
    const auto tr = picard_solve(raw, crit(), tg, few);
    CHECK(tr.warnings.size() == 1);
    for (const auto& f : tr.u) CHECK(divergence_defect(f) < 1e-10);
  }
  SUBCASE("large data does not converge") {
    PicardOptions few = opts;
    few.max_iter = 6;
    const auto tr = picard_solve(vortex_data(200.0), crit(), tg, few);
    CHECK_FALSE(tr.converged);
    CHECK(tr.status != "converged");
    CHECK(tr.history.size() >= 1);
  }
  SUBCASE("argument checks") {
    PicardOptions bad = opts;
    bad.max_iter = 0;
    CHECK_THROWS_AS(picard_solve(vortex_data(0.1), crit(), tg, bad), ConfigError);
    CHECK_THROWS_AS(picard_solve(Field(g, 1), crit(), tg, opts), DomainError);
    bad = opts;
    bad.start = std::vector<Field>(3, Field(g, 2));
    CHECK_THROWS_AS(picard_solve(vortex_data(0.1), crit(), tg, bad), DomainError);
  }
}

TEST_CASE("reference solver") {
  const Grid& g = g64();
  SUBCASE("zero data") {
    const auto tr = reference_solve(Field(g, 2), explicit_grid({0.5}));
    CHECK(tr.u[0].max_abs() == 0.0);
  }
  SUBCASE("linear regime is the heat flow") {
    const Field m = single_mode(g, 1);
    const auto tr = reference_solve(m, explicit_grid({0.1, 0.5}), {1e-2, false, 1.0});
    CHECK(max_diff(tr.u[0], heat(m, 0.1)) < 1e-10);
    CHECK(max_diff(tr.u[1], heat(m, 0.5)) < 1e-10);
  }
  SUBCASE("self-convergence") {
    const Field u0 = vortex_data(1.0);
    const auto a = reference_solve(u0, explicit_grid({0.5}), {4e-3, true, 1.0});
    const auto b = reference_solve(u0, explicit_grid({0.5}), {2e-3, true, 1.0});
    CHECK(rel_l2(a.u[0], b.u[0]) < 1e-6);
  }
  SUBCASE("step-size guard") {
    CHECK_THROWS_AS(reference_solve(vortex_data(500.0), explicit_grid({0.5}), {0.1, true, 1.0}), DomainError);
    CHECK_THROWS_AS(reference_solve(vortex_data(1.0), explicit_grid({0.5}), {0.0, true, 1.0}), ConfigError);
  }
}

TEST_CASE("self-similarity") {
  const Grid& g = g128();
  const auto tg = geometric_grid(4.0, kRho, 50);
  SUBCASE("zero trajectory") {
    const auto rep = self_similar_check(make_trajectory(tg, std::vector<Field>(50, Field(g, 2))), 2.0);
    CHECK(rep.max_error == 0.0);
    CHECK(rep.shift == 8);
  }
  SUBCASE("heat flow of homogeneous data") {
    const Field u0 = preset_field("rotational", {}, g);
    const auto rep = self_similar_check(heat_trajectory(u0, tg), 2.0, 0.25);
    MESSAGE("heat self-similar discrepancy " << rep.max_error);
    CHECK(rep.max_error < 1e-3);
    CHECK_THROWS_AS(self_similar_check(heat_trajectory(u0, tg), 1.5), DomainError);
  }
}

TEST_CASE("pairing") {
  const Grid& g = g128();
  const Field e = preset_field("gaussian", {{"sigma", 1.0}}, g);
  CHECK(std::abs(pair(e, e) - M_PI) < 1e-6);
  const Field a = preset_field("bump", {{"radius", 2.0}}, g), b = preset_field("gaussian", {{"sigma", 2.0}}, g);
  CHECK(pair(combine(2.0, a, -3.0, b), e) == doctest::Approx(2.0 * pair(a, e) - 3.0 * pair(b, e)).epsilon(1e-13));
  CHECK(pair(a, b) == pair(b, a));
  CHECK_THROWS(pair(e, preset_field("gaussian", {}, g64())));
}

TEST_CASE("asymptotic comparison") {
  const auto tg = geometric_grid(1.0, kRho, 10);
  const auto h = heat_trajectory(solenoidal(0, 5), tg);
  const auto c = asymptotic_compare(h, h, crit());
  for (double v : c.values) CHECK(v == 0.0);
  CHECK(c.final_ratio == 0.0);

  const Field bump = single_mode(g64(), 1);
  const auto hv = heat_trajectory(solenoidal(0, 5) + 0.1 * bump, tg);
  const auto d = asymptotic_compare(h, hv, crit());
  CHECK(d.trend == 1.0);
  // difference is the heat flow of one mode
  const double xi2 = [&] {
    const auto xi = pure_block_frequency(g64(), 1);
    return xi[0] * xi[0] + xi[1] * xi[1];
  }();
  for (std::size_t i = 1; i < d.values.size(); ++i)
    CHECK(d.values[i] / d.values[0] == doctest::Approx(std::exp(-xi2 * (tg.t[i] - tg.t[0]))).epsilon(1e-8));
}

TEST_CASE("trajectory persistence") {
  const auto tg = geometric_grid(1.0, kRho, 5);
  PicardOptions opts;
  opts.max_iter = 3;
  const auto tr = picard_solve(vortex_data(0.2), crit(), tg, opts);
  const auto dir = bhk::test::scratch("trajectory");
  std::filesystem::remove_all(dir);
  save_trajectory(tr, dir, crit());
  CHECK(std::filesystem::exists(dir / "history.csv"));
  const auto back = load_trajectory(dir);
  CHECK(back.times.t == tr.times.t);
  CHECK(back.times.rho == tr.times.rho);
  CHECK(back.history == tr.history);
  CHECK(back.iterations == tr.iterations);
  CHECK(back.status == tr.status);
  REQUIRE(back.u.size() == tr.u.size());
  for (std::size_t i = 0; i < tr.u.size(); ++i) CHECK(back.u[i].values() == tr.u[i].values());
  CHECK_THROWS_AS(load_trajectory(dir / "missing"), FormatError);
}
