#include <algorithm>
#include <cmath>
#include <random>

#include "bhk/littlewood_paley.hpp"
#include "bhk/operators.hpp"
#include "bhk/presets.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"

using namespace bhk;
using bhk::test::max_diff;

namespace {

const Grid& g256() {
  static const Grid g = make_grid(2, 256, 16.0);
  return g;
}
const Grid& g128() {
  static const Grid g = make_grid(2, 128, 16.0);
  return g;
}

Field band(int j, double seed, const Grid& g = g128()) {
  return preset_field("random_bandlimited", {{"j", j}, {"seed", seed}}, g);
}

Field with_symbol(const Field& f, const std::vector<double>& sym) {
  auto s = spectra(f);
  for (auto& c : s)
    for (std::size_t m = 0; m < c.size(); ++m) c[m] *= sym[m];
  return from_spectra(f.grid(), std::move(s));
}

Field zero_mode(const Field& f) {
  auto s = spectra(f);
  for (auto& c : s)
    for (std::size_t m = 1; m < c.size(); ++m) c[m] = 0.0;
  return from_spectra(f.grid(), std::move(s));
}

}  // namespace

TEST_CASE("bump family") {
  const Grid& g = g256();
  const auto fam = build_bump(g);
  const auto& lat = lattice(g);
  CHECK(fam->partition_defect() < 1e-12);
  CHECK(build_bump(g) == fam);

  SUBCASE("partition of unity at random resolved points") {
    const auto [lo, hi] = fam->resolved_band();
    std::vector<std::size_t> inside;
    for (std::size_t m = 0; m < g.size(); ++m)
      if (lat.absxi[m] >= lo && lat.absxi[m] <= hi) inside.push_back(m);
    REQUIRE(!inside.empty());
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> pick(0, inside.size() - 1);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const std::size_t m = inside[pick(rng)];
      double sum = 0.0;
      for (int j = g.j_min; j <= g.j_max; ++j) sum += fam->symbol(j)[m];
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    CHECK(worst < 1e-12);
  }
  SUBCASE("support and scaling") {
    for (int j = fam->j_ext_min(); j <= fam->j_ext_max(); ++j) {
      const auto& s = fam->symbol(j);
      bool zeros = true, scaled = true, nonneg = true;
      for (std::size_t m = 0; m < g.size(); ++m) {
        const double r = lat.absxi[m] / std::ldexp(1.0, j);
        if ((r <= 0.75 || r >= 8.0 / 3.0) && s[m] != 0.0) zeros = false;
        if (lat.xi2[m] > 0.0 && std::abs(s[m] - bump_profile(r)) > 1e-15) scaled = false;
        if (s[m] < 0.0) nonneg = false;
      }
      CHECK(zeros);
      CHECK(scaled);
      CHECK(nonneg);
    }
    CHECK(theta_cutoff(0.75) == 1.0);
    CHECK(theta_cutoff(4.0 / 3.0) == 0.0);
    for (double r : {1.34, 1.4, 1.49}) CHECK(bump_profile(r) == 1.0);
    CHECK_THROWS_AS(fam->symbol(fam->j_ext_max() + 1), DomainError);
  }
}

TEST_CASE("dyadic blocks") {
  const Grid& g = g256();
  const auto fam = build_bump(g);

  SUBCASE("pure block is reproduced exactly") {
    for (int j = g.j_min; j <= g.j_max; ++j) {
      const Field f = preset_field("pure_block", {{"j", j}}, g);
      CHECK(max_diff(lp_block(f, j), f) < 1e-12);
      for (int k = g.j_min; k <= g.j_max; ++k)
        if (k != j) CHECK(lp_block(f, k).max_abs() < 1e-12);
    }
  }
  SUBCASE("separated blocks are orthogonal") {
    const Field f = band(1, 5, g) + band(2, 6, g) + band(0, 9, g);
    for (int j = g.j_min; j <= g.j_max; ++j)
      for (int k = g.j_min; k <= g.j_max; ++k)
        if (std::abs(j - k) >= 2) CHECK(lp_block(lp_block(f, k), j).max_abs() < 1e-12);
  }
  SUBCASE("reconstruction") {
    const Field f = band(0, 1, g) + band(2, 2, g) + preset_field("gaussian", {{"sigma", 1.0}}, g);
    Field sum = zero_mode(f);
    for (int j = fam->j_ext_min(); j <= fam->j_ext_max(); ++j) sum = sum + with_symbol(f, fam->symbol(j));
    CHECK(max_diff(sum, f) < 1e-10);
    // low-pass equals the zero mode plus blocks up to k
    const int k = 1;
    Field partial = zero_mode(f);
    for (int j = fam->j_ext_min(); j <= k; ++j) partial = partial + with_symbol(f, fam->symbol(j));
    CHECK(max_diff(lp_lowpass(f, k), partial) < 1e-12);
  }
  SUBCASE("index checks") {
    const Field f = band(0, 1, g);
    CHECK_THROWS_AS(lp_block(f, g.j_max + 1), DomainError);
    CHECK_THROWS_AS(lp_block(f, g.j_min - 1), DomainError);
    CHECK_THROWS_AS(lp_lowpass(f, g.j_max + 1), DomainError);
  }
  SUBCASE("blocks commute with multipliers") {
    const Field f = band(1, 21, g) + band(0, 22, g);
    for (const auto& P : {riesz_symbol(0), quadratic_symbol(0, 1), heat_symbol(0.3), potential_symbol(0.7)})
      for (int j = g.j_min; j <= g.j_max; ++j) {
        const Field a = lp_block(apply_multiplier(f, P), j), b = apply_multiplier(lp_block(f, j), P);
        CHECK(max_diff(a, b) < 1e-12 * std::max(1.0, b.max_abs()));
      }
  }
}

TEST_CASE("paraproduct decomposition") {
  const Grid& g = g256();
  SUBCASE("identity on band-limited pairs") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pickj(-1, 2);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Field f = band(pickj(rng), 500 + i, g) + 0.3 * band(pickj(rng), 600 + i, g);
      const Field h = band(pickj(rng), 700 + i, g);
      const auto parts = bony(f, h);
      const Field sum = parts.low_high + parts.high_low + parts.resonant;
      worst = std::max(worst, max_diff(sum, dealiased_product(f, h)) / (f.max_abs() * h.max_abs()));
    }
    CHECK(worst < 1e-10);
  }
  SUBCASE("zero input") {
    const auto parts = bony(Field(g, 1), band(0, 1, g));
    CHECK(parts.low_high.max_abs() == 0.0);
    CHECK(parts.high_low.max_abs() == 0.0);
    CHECK(parts.resonant.max_abs() == 0.0);
  }
  SUBCASE("spectral localisation of paraproduct terms") {
    const auto fam = build_bump(g);
    const Field f = band(0, 41, g) + band(2, 42, g) + band(3, 43, g);
    const Field h = band(-1, 44, g) + band(1, 45, g) + band(2, 46, g);
    double worst = 0.0;
    int pairs = 0;
    for (int k = fam->j_ext_min() + 2; k <= fam->j_ext_max(); ++k) {
      const Field prod = dealiased_product(with_symbol(h, fam->lowpass_symbol(k - 2)), with_symbol(f, fam->symbol(k)));
      for (int j = fam->j_ext_min(); j <= fam->j_ext_max(); ++j) {
        if (std::abs(j - k) < 5) continue;
        worst = std::max(worst, with_symbol(prod, fam->symbol(j)).max_abs());
        ++pairs;
      }
    }
    CHECK(pairs > 0);
    CHECK(worst < 1e-10);
  }
  CHECK_THROWS(bony(band(0, 1, g), band(0, 1, g128())));
}

TEST_CASE("Riesz potential") {
  const Grid& g = g256();
  SUBCASE("pure mode") {
    const Field f = preset_field("pure_block", {{"j", 1}}, g);
    const auto xi = pure_block_frequency(g, 1);
    const double r = std::hypot(xi[0], xi[1]);
    for (double s : {-1.0, 0.5, 2.0}) CHECK(bhk::test::rel_diff(riesz_potential(f, s), std::pow(r, s) * f) < 1e-12);
  }
  SUBCASE("inverse up to the mean") {
    const Field f = band(0, 3, g) + preset_field("gaussian", {{"sigma", 1.0}}, g);
    const Field back = riesz_potential(riesz_potential(f, -0.6), 0.6);
    CHECK(max_diff(back, f - zero_mode(f)) < 1e-10);
  }
  SUBCASE("first-order potential of a Gaussian at the origin") {
    const double sigma = 0.5;
    const Field f = preset_field("gaussian", {{"sigma", sigma}}, g);
    const double v = riesz_potential(f, 1.0).values()[bhk::test::origin_index(g)];
    // (2 pi)^{-2} int |xi| 2 pi sigma^2 e^{-sigma^2 |xi|^2 / 2} dxi by radial Simpson quadrature
    const int K = 200000;
    const double R = 40.0 / sigma, dr = R / K;
    double acc = 0.0;
    for (int i = 0; i <= K; ++i) {
      const double r = i * dr;
      const double w = (i == 0 || i == K) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * r * r * std::exp(-0.5 * sigma * sigma * r * r);
    }
    const double oracle = sigma * sigma * acc * dr / 3.0;
    CHECK(std::abs(v / oracle - 1.0) < 1e-4);
  }
}

TEST_CASE("Sobolev and Besov weak-Herz norms") {
  const Grid& g = g256();
  const HerzParams hp{0.2, 2.0, inf};
  SUBCASE("s = 0 is the weak-Herz norm") {
    const Field f = band(1, 8, g);
    const double a = sobolev_wh_norm(f, {hp.alpha, hp.p, hp.q, 0.0, inf});
    CHECK(a == doctest::Approx(weak_herz_norm(f, hp).aggregate).epsilon(1e-12));
  }
  SUBCASE("pure block") {
    for (int j = g.j_min; j <= g.j_max; ++j) {
      const Field f = preset_field("pure_block", {{"j", j}}, g);
      const auto xi = pure_block_frequency(g, j);
      const double rel = std::hypot(xi[0], xi[1]) / std::ldexp(1.0, j);
      const double base = weak_herz_norm(f, hp).aggregate;
      for (double s : {0.5, 1.0, 1.5}) {
        const double ratio = sobolev_wh_norm(f, {hp.alpha, hp.p, hp.q, s, inf}) / base /
                             std::pow(2.0, j * s);
        CHECK(ratio == doctest::Approx(std::pow(rel, s)).epsilon(1e-10));
        CHECK(ratio >= std::pow(4.0 / 3.0, s));
        CHECK(ratio <= std::pow(1.5, s));

        const auto prof = besov_wh_norm(f, {hp.alpha, hp.p, hp.q, s, inf});
        CHECK(prof.aggregate == doctest::Approx(std::pow(2.0, j * s) * base).epsilon(1e-10));
        for (int k = prof.j_lo; k <= prof.j_hi; ++k)
          if (k != j) CHECK(prof.entries[k - prof.j_lo] < 1e-12 * prof.aggregate);
      }
    }
  }
  SUBCASE("r ordering and sandwich shape") {
    for (int i = 0; i < 5; ++i) {
      const Field f = band(i % 3, 30 + i, g) + band((i + 1) % 3, 40 + i, g);
      const double b1 = besov_wh_norm(f, {hp.alpha, hp.p, hp.q, 0.3, 1.0}).aggregate;
      const double b2 = besov_wh_norm(f, {hp.alpha, hp.p, hp.q, 0.3, 2.0}).aggregate;
      const double bi = besov_wh_norm(f, {hp.alpha, hp.p, hp.q, 0.3, inf}).aggregate;
      CHECK(bi <= b2 * (1 + 1e-12));
      CHECK(b2 <= b1 * (1 + 1e-12));
    }
    CHECK_THROWS_AS(besov_wh_norm(band(0, 1, g), {0.0, 2.0, inf, 0.0, 0.5}), DomainError);
    CHECK_THROWS_AS(besov_wh_norm(band(0, 1, g), {0.0, 2.0, inf, 0.0, inf}, IndexRange{-4, 1}), DomainError);
  }
  SUBCASE("critical norm of the rotational field is scale invariant") {
    const Field u = preset_field("rotational", {}, g);
    const BesovParams crit{0.0, 2.0, inf, 0.0, inf};
    const double base = besov_wh_norm(u, crit).aggregate;
    for (double lam : {0.5, 2.0}) CHECK(std::abs(std::log(besov_wh_norm(rescale(u, lam), crit).aggregate / base)) < 0.1);
  }
  SUBCASE("serialization") {
    const auto prof = besov_wh_norm(band(0, 2, g), {0.0, 2.0, inf, 0.5, 2.0});
    const auto j = nlohmann::json::parse(block_profile_json(prof));
    CHECK(j["space"] == "bwk");
    CHECK(j["params"]["r"] == "2");
    CHECK(j["profile"].size() == prof.entries.size());
    CHECK(j["profile"][0][0].get<int>() == prof.j_lo);
    CHECK(j["aggregate"].get<double>() == prof.aggregate);
    CHECK(j["truncation_tail"].contains("converged"));
    CHECK(block_profile_csv(prof).rfind("j,value\n", 0) == 0);
  }
}

TEST_CASE("embedding pairs") {
  const Grid& g = g256();
  SUBCASE("exponent arithmetic") {
    const auto e = embedding_pair(2, {0.1, 2.0, inf, 0.0, inf}, 3.0, 2.0);
    CHECK(e.rhs.alpha == doctest::Approx(0.1 + 2.0 * (0.5 - 1.0 / 3.0)));
    CHECK(e.rhs.s == doctest::Approx(2.0 * (0.5 - 1.0 / 3.0)));
    CHECK(e.rhs.p == 2.0);
    const auto d = doubling_pair(2, 0.2, 0.0, 2.0, inf, inf);
    CHECK(d.lhs.p == 4.0);
    CHECK(d.rhs.p == 2.0);
    CHECK(d.rhs.alpha == doctest::Approx(0.4));
    CHECK(d.rhs.s == doctest::Approx(0.2 + 0.5));
  }
  SUBCASE("inadmissible exponents") {
    CHECK_THROWS_WITH_AS(embedding_pair(2, {0.0, 2.0, inf, 0.0, inf}, 1.5, 1.2), "embedding: requires p <= p1",
                         DomainError);
    CHECK_THROWS_WITH_AS(embedding_pair(2, {0.0, 2.0, inf, 0.0, inf}, 3.0, 4.0), "embedding: requires p2 <= p1",
                         DomainError);
    CHECK_THROWS_AS(embedding_pair(2, {-1.5, 2.0, inf, 0.0, inf}, 3.0, 2.0), DomainError);
    CHECK_THROWS_AS(embedding_pair(2, {0.0, 2.0, inf, 0.0, inf}, inf, 2.0), DomainError);
    CHECK_THROWS_AS(doubling_pair(2, 0.0, 0.0, 1.0, inf, inf), DomainError);
    CHECK_THROWS_AS(doubling_pair(2, 0.6, 0.0, 2.0, inf, inf), DomainError);
  }
  SUBCASE("ratios") {
    const auto pair = doubling_pair(2, 0.2, 0.0, 2.0, inf, inf);
    CHECK(sobolev_embedding_check(Field(g, 1), pair).ratio == 0.0);
    const auto rep = sobolev_embedding_check(band(1, 4, g), pair);
    CHECK(rep.ratio > 0.0);
    CHECK(std::isfinite(rep.ratio));
    CHECK(rep.ratio == doctest::Approx(rep.lhs / rep.rhs));
  }
}
