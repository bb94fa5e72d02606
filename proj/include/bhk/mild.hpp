#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bhk/field.hpp"
#include "bhk/littlewood_paley.hpp"
#include "bhk/norms.hpp"

namespace bhk {

struct MildParams {
  int n = 2;
  double p = 2.0, q = inf, alpha = 0.0;
  double s = 0.0;  // alpha + n/p - 1
  double w = 0.0;  // 1/2 - (alpha/2 + n/(4p))
  BesovParams critical() const { return {alpha, p, q, s, inf}; }
  HerzParams doubled() const { return {alpha, 2.0 * p, 2.0 * q}; }
  // alpha + n/(2p)
  double decay_exponent() const { return alpha + n / (2.0 * p); }
};

MildParams admissible(int n, double p, double q, double alpha);

struct BetaDiagnostics {
  double weighted_part = 0.0;  // B(alpha + n/2p, w)
  double critical_part = 0.0;  // B(alpha + n/2p, 1 - alpha - n/2p)
};
BetaDiagnostics beta_diagnostics(const MildParams& mp);

struct TimeGrid {
  std::vector<double> t;
  double rho = 0.0;  // 0 when the points are not geometric
  std::size_t size() const { return t.size(); }
  double t_min() const { return t.front(); }
  double T() const { return t.back(); }
  // index of a stored time within relative tolerance
  std::optional<std::size_t> find(double time, double rel = 1e-9) const;
  bool same(const TimeGrid& o) const;
};

// t_i = T rho^{-(M-i)}, i = 1..M
TimeGrid geometric_grid(double T, double rho, int M);
// largest geometric grid ending at T whose first point is >= t_min
TimeGrid geometric_grid_span(double t_min, double T, double rho);
TimeGrid explicit_grid(std::vector<double> times);

struct QuadConfig {
  // integrand on [0, t_1] modelled as c tau^{-first_exponent}
  double first_exponent = 0.5;
};
QuadConfig default_quad(const MildParams& mp);

struct XNorm {
  double total = 0.0, part1 = 0.0, part2 = 0.0;
  std::vector<double> part1_curve, part2_curve;  // per stored time, part2 already weighted
};

struct Trajectory {
  TimeGrid times;
  std::vector<Field> u;  // physical vector fields
  std::vector<double> history;
  bool converged = true;
  int iterations = 0;
  double contraction = 0.0;
  std::string status = "ok";
  std::vector<std::string> warnings;
  std::optional<XNorm> xnorm;
};

Trajectory make_trajectory(const TimeGrid& tg, std::vector<Field> fields);
Trajectory heat_trajectory(const Field& u0, const TimeGrid& tg);
Trajectory scaled(const Trajectory& a, double c);

// P div(u (x) v), component a = sum_b d_b(u_b v_a), dealiased
Field projected_divergence(const Field& u, const Field& v);

// -int_0^t G(t - tau) P div(u (x) v)(tau) dtau at one stored time
Field duhamel_bilinear(const Trajectory& uT, const Trajectory& vT, double t, const QuadConfig& quad);
// the same at every stored time
Trajectory duhamel_all(const Trajectory& uT, const Trajectory& vT, const QuadConfig& quad);

XNorm x_norm(const Trajectory& uT, const MildParams& mp, std::optional<IndexRange> jrange = {},
             std::optional<IndexRange> krange = {});

struct PicardOptions {
  double tol = 1e-8;
  int max_iter = 30;
  bool zero_start = false;  // u^(0) = 0 instead of G(t)u0
  std::optional<std::vector<Field>> start;  // explicit u^(0) per stored time
  std::optional<QuadConfig> quad;
};

Trajectory picard_solve(const Field& u0, const MildParams& mp, const TimeGrid& tg, const PicardOptions& opts = {});
// || u - (G(t)u0 + B(u,u)) ||_X
double fixed_point_residual(const Trajectory& uT, const Field& u0, const MildParams& mp, const QuadConfig& quad);
double x_distance(const Trajectory& a, const Trajectory& b, const MildParams& mp);

struct ReferenceOptions {
  double dt = 1e-3;
  bool nonlinear = true;
  double cfl_limit = 1.0;
};
// integrating-factor RK4, outputs at the requested times
Trajectory reference_solve(const Field& u0, const TimeGrid& tg, const ReferenceOptions& opts = {});

struct SelfSimilarReport {
  double lambda = 1.0;
  int shift = 0;  // lambda^2 t_i = t_{i + shift}
  double r_inner = 0.0, r_outer = 0.0;
  std::vector<double> times, errors;
  double max_error = 0.0;
};
// relative L^2 of u(t) - lambda u(lambda x, lambda^2 t) on an annulus, over matched times up to t_max
SelfSimilarReport self_similar_check(const Trajectory& uT, double lambda, double t_max = inf);

double pair(const Field& g, const Field& phi);

struct DecayCurve {
  std::vector<double> times, values;
  double trend = 0.0;  // fraction of consecutive decreases
  double final_ratio = 0.0;
};
DecayCurve asymptotic_compare(const Trajectory& uT, const Trajectory& vT, const MildParams& mp);

// directory with manifest.json, u_<i>.bhf, history.csv
void save_trajectory(const Trajectory& tr, const std::filesystem::path& dir, const std::optional<MildParams>& mp = {});
Trajectory load_trajectory(const std::filesystem::path& dir);

}  // namespace bhk
