#include "bhk/mild.hpp"

#include <boost/math/special_functions/hypergeometric_1F1.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "bhk/fft.hpp"
#include "bhk/field_io.hpp"
#include "bhk/operators.hpp"
#include "json.hpp"

namespace bhk {

namespace {

using VecSpec = std::vector<Spectrum>;
using SpecTraj = std::vector<VecSpec>;

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// 2/3-rule mask as a list of retained modes
const std::vector<std::size_t>& kept_modes(const Grid& g) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, double>, std::vector<std::size_t>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(g.n, g.N, g.L);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const int K = dealias_cutoff(g);
  std::vector<std::size_t> keep;
  int idx[3];
  for (std::size_t m = 0; m < g.size(); ++m) {
    unravel(m, g.n, g.N, idx);
    bool in = true;
    for (int a = 0; a < g.n; ++a) in = in && std::abs(g.wave(idx[a])) <= K;
    if (in) keep.push_back(m);
  }
  return cache.emplace(key, std::move(keep)).first->second;
}

void mask(const Grid& g, const Spectrum& in, Spectrum& out) {
  std::fill(out.begin(), out.end(), cplx(0.0));
  for (auto m : kept_modes(g)) out[m] = in[m];
}

VecSpec zeros(const Grid& g, int comps) { return VecSpec(comps, Spectrum(g.size(), cplx(0.0))); }

// P div(u (x) v) with dealiased inputs and output
class Nonlinear {
 public:
  explicit Nonlinear(const Grid& g) : g_(g), lat_(lattice(g)), M_(g.size()), buf_(M_) {
    ur_.assign(g.n, std::vector<double>(M_));
    vr_.assign(g.n, std::vector<double>(M_));
  }

  void eval(const VecSpec& u, const VecSpec* v, VecSpec& out) {
    const int n = g_.n;
    umax_ = 0.0;
    for (int a = 0; a < n; ++a) phys(u[a], ur_[a]);
    for (std::size_t m = 0; m < M_; ++m) {
      double s = 0.0;
      for (int a = 0; a < n; ++a) s += ur_[a][m] * ur_[a][m];
      umax_ = std::max(umax_, s);
    }
    umax_ = std::sqrt(umax_);
    const auto& vv = v ? vr_ : ur_;
    if (v)
      for (int a = 0; a < n; ++a) phys((*v)[a], vr_[a]);
    out.assign(n, Spectrum(M_, cplx(0.0)));
    const auto& keep = kept_modes(g_);
    // w_ab = F(u_b v_a); symmetric when v is u
    std::vector<Spectrum> w(n * n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (!v && b < a) {
          w[a * n + b] = w[b * n + a];
          continue;
        }
        Spectrum s(M_);
        for (std::size_t m = 0; m < M_; ++m) s[m] = cplx(ur_[b][m] * vv[a][m], 0.0);
        fft_forward_inplace(g_, s.data());
        w[a * n + b] = std::move(s);
      }
    const cplx I(0.0, 1.0);
    for (auto m : keep) {
      cplx d[3];
      for (int a = 0; a < n; ++a) {
        d[a] = 0.0;
        for (int b = 0; b < n; ++b) d[a] += I * lat_.xi[b][m] * w[a * n + b][m];
      }
      const double x2 = lat_.xi2[m];
      if (x2 > 0.0) {
        cplx dot = 0.0;
        for (int a = 0; a < n; ++a) dot += lat_.xi[a][m] * d[a];
        for (int a = 0; a < n; ++a) d[a] -= lat_.xi[a][m] * dot / x2;
      }
      for (int a = 0; a < n; ++a) out[a][m] = d[a];
    }
  }

  double umax() const { return umax_; }

 private:
  void phys(const Spectrum& s, std::vector<double>& out) {
    mask(g_, s, buf_);
    fft_inverse_real(g_, buf_.data(), out.data());
  }

  const Grid& g_;
  const Lattice& lat_;
  std::size_t M_;
  Spectrum buf_;
  std::vector<std::vector<double>> ur_, vr_;
  double umax_ = 0.0;
};

// int_0^1 e^{-c(1-u)} u^{-beta} du
double first_panel_factor(double c, double beta) {
  if (c == 0.0) return 1.0 / (1.0 - beta);
  return boost::math::hypergeometric_1F1(1.0, 2.0 - beta, -c) / (1.0 - beta);
}

const std::vector<double>& first_panel_table(const Grid& g, double t1, double beta) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, double, double, double>, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(g.n, g.N, g.L, t1, beta);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const auto& lat = lattice(g);
  std::vector<double> tab(g.size(), 0.0);
  std::map<double, double> seen;
  for (auto m : kept_modes(g)) {
    const double c = lat.xi2[m] * t1;
    auto s = seen.find(c);
    if (s == seen.end()) s = seen.emplace(c, t1 * first_panel_factor(c, beta)).first;
    tab[m] = s->second;
  }
  return cache.emplace(key, std::move(tab)).first->second;
}

// weights of int_0^D e^{-a s} [N_prev s/D + N_cur (1 - s/D)] ds, divided by D
void panel_weights(double z, double& w_prev, double& w_cur) {
  double phi1, psi;
  if (z < 0.05) {
    // psi = sum (-z)^k / (k! (k+2)), phi1 = sum (-z)^k / (k+1)!
    double term = 1.0;
    psi = 0.0;
    phi1 = 0.0;
    for (int k = 0; k < 14; ++k) {
      psi += term / (k + 2);
      phi1 += term / (k + 1);
      term *= -z / (k + 1);
    }
  } else {
    phi1 = -std::expm1(-z) / z;
    psi = (1.0 - std::exp(-z) * (1.0 + z)) / (z * z);
  }
  w_prev = psi;
  w_cur = phi1 - psi;
}

// B_i for i <= upto, driven by nonlinear samples produced on demand
template <class NonlinearAt, class Sink>
void duhamel_recurrence(const Grid& g, const TimeGrid& tg, const QuadConfig& quad, std::size_t upto,
                        NonlinearAt&& nonlinear_at, Sink&& sink) {
  const auto& lat = lattice(g);
  const auto& keep = kept_modes(g);
  const int n = g.n;
  const auto& J = first_panel_table(g, tg.t[0], quad.first_exponent);
  VecSpec Nprev, Ncur;
  nonlinear_at(0, Nprev);
  VecSpec B = zeros(g, n);
  for (int a = 0; a < n; ++a)
    for (auto m : keep) B[a][m] = -J[m] * Nprev[a][m];
  sink(0, B);
  for (std::size_t i = 1; i <= upto; ++i) {
    nonlinear_at(i, Ncur);
    const double D = tg.t[i] - tg.t[i - 1];
    for (auto m : keep) {
      const double z = lat.xi2[m] * D;
      const double E = std::exp(-z);
      double wp, wc;
      panel_weights(z, wp, wc);
      for (int a = 0; a < n; ++a) B[a][m] = E * B[a][m] - D * (wp * Nprev[a][m] + wc * Ncur[a][m]);
    }
    sink(i, B);
    std::swap(Nprev, Ncur);
  }
}

SpecTraj to_spec(const Trajectory& tr) {
  SpecTraj s;
  s.reserve(tr.u.size());
  for (const auto& f : tr.u) s.push_back(spectra(f));
  return s;
}

Field to_field(const Grid& g, VecSpec s) { return from_spectra(g, std::move(s), Rep::physical); }

void heat_apply(const Grid& g, const VecSpec& in, double t, VecSpec& out) {
  const auto& lat = lattice(g);
  out.resize(in.size());
  for (std::size_t a = 0; a < in.size(); ++a) {
    out[a].resize(in[a].size());
    for (std::size_t m = 0; m < in[a].size(); ++m) out[a][m] = std::exp(-t * lat.xi2[m]) * in[a][m];
  }
}

struct XParts {
  double part1 = 0.0, part2 = 0.0;
};

XParts x_parts_at(const Grid& g, const VecSpec& s, double t, const MildParams& mp, std::optional<IndexRange> jrange,
                  std::optional<IndexRange> krange) {
  XParts x;
  x.part1 = besov_wh_spectra(g, s, mp.critical(), jrange, krange).aggregate;
  const std::size_t M = g.size();
  std::vector<double> mod(M, 0.0), v(M);
  for (const auto& c : s) {
    Spectrum tmp = c;
    fft_inverse_real(g, tmp.data(), v.data());
    for (std::size_t m = 0; m < M; ++m) mod[m] += v[m] * v[m];
  }
  for (auto& e : mod) e = std::sqrt(e);
  x.part2 = std::pow(t, mp.w) * weak_herz_modulus(g, mod, mp.doubled(), krange).aggregate;
  return x;
}

VecSpec difference(const VecSpec& a, const VecSpec& b) {
  VecSpec d = a;
  for (std::size_t c = 0; c < d.size(); ++c)
    for (std::size_t m = 0; m < d[c].size(); ++m) d[c][m] -= b[c][m];
  return d;
}

void check_vector(const Field& u, const char* where) {
  if (u.components() != u.grid().n)
    throw DomainError(std::string(where) + ": expected a vector field with " + std::to_string(u.grid().n) +
                      " components");
}

void check_pair(const Trajectory& a, const Trajectory& b, const char* where) {
  if (a.u.empty() || b.u.empty()) throw DomainError(std::string(where) + ": empty trajectory");
  if (!a.times.same(b.times)) throw DomainError(std::string(where) + ": time grids differ");
  require_same_grid(a.u.front().grid(), b.u.front().grid(), where);
}

// Picard update: out_i = lin_i + B(cur, cur)_i; returns X-norm of out - cur
double picard_step(const Grid& g, const TimeGrid& tg, const VecSpec& u0hat, const SpecTraj& cur, SpecTraj& out,
                   const MildParams& mp, const QuadConfig& quad) {
  Nonlinear nl(g);
  out.resize(cur.size());
  double p1 = 0.0, p2 = 0.0;
  duhamel_recurrence(
      g, tg, quad, tg.size() - 1, [&](std::size_t i, VecSpec& N) { nl.eval(cur[i], nullptr, N); },
      [&](std::size_t i, const VecSpec& B) {
        heat_apply(g, u0hat, tg.t[i], out[i]);
        for (std::size_t a = 0; a < B.size(); ++a)
          for (std::size_t m = 0; m < B[a].size(); ++m) out[i][a][m] += B[a][m];
        const auto x = x_parts_at(g, difference(out[i], cur[i]), tg.t[i], mp, {}, {});
        p1 = std::max(p1, x.part1);
        p2 = std::max(p2, x.part2);
      });
  return p1 + p2;
}

double x_total(const Grid& g, const TimeGrid& tg, const SpecTraj& s, const MildParams& mp) {
  double p1 = 0.0, p2 = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto x = x_parts_at(g, s[i], tg.t[i], mp, {}, {});
    p1 = std::max(p1, x.part1);
    p2 = std::max(p2, x.part2);
  }
  return p1 + p2;
}

}  // namespace

MildParams admissible(int n, double p, double q, double alpha) {
  if (n != 2 && n != 3) throw DomainError("dimension n must be 2 or 3");
  if (std::isinf(p) && p > 0) throw DomainError("p = ∞ not admitted (requires p < ∞)");
  if (!(p > n / 2.0)) throw DomainError("p ≤ n/2 (requires n/2 < p)");
  if (!(q >= 1.0)) throw DomainError("q < 1 (requires 1 ≤ q ≤ ∞)");
  if (!(alpha >= 0.0)) throw DomainError("α < 0 (requires 0 ≤ α)");
  const double top = std::min(1.0 - n / (2.0 * p), n / (2.0 * p));
  if (!(alpha < top)) throw DomainError("α ≥ min{1−n/2p, n/2p} = " + num(top));
  MildParams mp;
  mp.n = n;
  mp.p = p;
  mp.q = q;
  mp.alpha = alpha;
  mp.s = alpha + n / p - 1.0;
  mp.w = 0.5 - (alpha / 2.0 + n / (4.0 * p));
  return mp;
}

BetaDiagnostics beta_diagnostics(const MildParams& mp) {
  const double a = mp.decay_exponent();
  return {std::beta(a, mp.w), std::beta(a, 1.0 - a)};
}

std::optional<std::size_t> TimeGrid::find(double time, double rel) const {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (std::abs(t[i] - time) <= rel * std::max(std::abs(time), t[i])) return i;
  return std::nullopt;
}

bool TimeGrid::same(const TimeGrid& o) const {
  if (o.t.size() != t.size()) return false;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (std::abs(t[i] - o.t[i]) > 1e-12 * t[i]) return false;
  return true;
}

TimeGrid geometric_grid(double T, double rho, int M) {
  if (!(rho > 1.0 && rho <= 2.0)) throw ConfigError("time grid ratio rho must lie in (1, 2]");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("time grid end T must be positive");
  if (M < 2) throw ConfigError("time grid needs at least 2 points");
  TimeGrid tg;
  tg.rho = rho;
  for (int i = 1; i <= M; ++i) tg.t.push_back(i == M ? T : T * std::pow(rho, -(M - i)));
  return tg;
}

TimeGrid geometric_grid_span(double t_min, double T, double rho) {
  if (!(t_min > 0.0) || !(T > t_min)) throw ConfigError("time grid requires 0 < t_min < T");
  if (!(rho > 1.0 && rho <= 2.0)) throw ConfigError("time grid ratio rho must lie in (1, 2]");
  const int M = static_cast<int>(std::floor(std::log(T / t_min) / std::log(rho) + 1e-9)) + 1;
  return geometric_grid(T, rho, M);
}

TimeGrid explicit_grid(std::vector<double> times) {
  if (times.empty()) throw ConfigError("time grid is empty");
  for (std::size_t i = 0; i < times.size(); ++i)
    if (!(times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1])))
      throw ConfigError("time grid must be positive and strictly increasing");
  TimeGrid tg;
  tg.t = std::move(times);
  return tg;
}

QuadConfig default_quad(const MildParams& mp) { return {1.0 - mp.decay_exponent()}; }

Trajectory make_trajectory(const TimeGrid& tg, std::vector<Field> fields) {
  if (fields.size() != tg.size()) throw DomainError("trajectory: one field per stored time required");
  for (const auto& f : fields) {
    check_vector(f, "trajectory");
    require_same_grid(f.grid(), fields.front().grid(), "trajectory");
  }
  Trajectory tr;
  tr.times = tg;
  for (auto& f : fields) tr.u.push_back(as_physical(f));
  return tr;
}

Trajectory heat_trajectory(const Field& u0, const TimeGrid& tg) {
  check_vector(u0, "heat_trajectory");
  std::vector<Field> fs;
  for (double t : tg.t) fs.push_back(heat(as_physical(u0), t));
  return make_trajectory(tg, std::move(fs));
}

Trajectory scaled(const Trajectory& a, double c) {
  Trajectory out = a;
  for (auto& f : out.u) f = c * f;
  out.xnorm.reset();
  return out;
}

Field projected_divergence(const Field& u, const Field& v) {
  check_vector(u, "projected_divergence");
  check_vector(v, "projected_divergence");
  require_same_grid(u.grid(), v.grid(), "projected_divergence");
  Nonlinear nl(u.grid());
  VecSpec out;
  const auto su = spectra(u), sv = spectra(v);
  nl.eval(su, &sv, out);
  return to_field(u.grid(), std::move(out));
}

Field duhamel_bilinear(const Trajectory& uT, const Trajectory& vT, double t, const QuadConfig& quad) {
  check_pair(uT, vT, "duhamel_bilinear");
  const auto idx = uT.times.find(t);
  if (!idx) throw DomainError("duhamel_bilinear: t = " + num(t) + " is not a stored time in [t_1, T]");
  const Grid& g = uT.u.front().grid();
  Nonlinear nl(g);
  VecSpec result;
  duhamel_recurrence(
      g, uT.times, quad, *idx,
      [&](std::size_t i, VecSpec& N) {
        const auto su = spectra(uT.u[i]), sv = spectra(vT.u[i]);
        nl.eval(su, &sv, N);
      },
      [&](std::size_t i, const VecSpec& B) {
        if (i == *idx) result = B;
      });
  return to_field(g, std::move(result));
}

Trajectory duhamel_all(const Trajectory& uT, const Trajectory& vT, const QuadConfig& quad) {
  check_pair(uT, vT, "duhamel_all");
  const Grid& g = uT.u.front().grid();
  Nonlinear nl(g);
  std::vector<Field> out;
  const bool same = &uT == &vT;
  duhamel_recurrence(
      g, uT.times, quad, uT.times.size() - 1,
      [&](std::size_t i, VecSpec& N) {
        const auto su = spectra(uT.u[i]);
        if (same) {
          nl.eval(su, nullptr, N);
        } else {
          const auto sv = spectra(vT.u[i]);
          nl.eval(su, &sv, N);
        }
      },
      [&](std::size_t, const VecSpec& B) { out.push_back(to_field(g, B)); });
  return make_trajectory(uT.times, std::move(out));
}

XNorm x_norm(const Trajectory& uT, const MildParams& mp, std::optional<IndexRange> jrange,
             std::optional<IndexRange> krange) {
  if (uT.u.empty()) throw DomainError("x_norm: empty trajectory");
  XNorm x;
  for (std::size_t i = 0; i < uT.u.size(); ++i) {
    const Field& f = uT.u[i];
    const auto parts = x_parts_at(f.grid(), spectra(f), uT.times.t[i], mp, jrange, krange);
    x.part1_curve.push_back(parts.part1);
    x.part2_curve.push_back(parts.part2);
  }
  x.part1 = *std::max_element(x.part1_curve.begin(), x.part1_curve.end());
  x.part2 = *std::max_element(x.part2_curve.begin(), x.part2_curve.end());
  x.total = x.part1 + x.part2;
  return x;
}

Trajectory picard_solve(const Field& u0_in, const MildParams& mp, const TimeGrid& tg, const PicardOptions& opts) {
  check_vector(u0_in, "picard_solve");
  if (u0_in.grid().n != mp.n) throw DomainError("picard_solve: grid dimension differs from the parameters");
  if (opts.max_iter < 1) throw ConfigError("picard_solve: max_iter must be >= 1");
  const Grid& g = u0_in.grid();
  const QuadConfig quad = opts.quad.value_or(default_quad(mp));
  Trajectory tr;
  tr.times = tg;
  Field u0 = as_physical(u0_in);
  if (divergence_defect(u0) > 1e-10) {
    u0 = leray_project(u0);
    tr.warnings.push_back("initial data was not divergence-free and has been projected");
  }
  const VecSpec u0hat = spectra(u0);
  if (opts.start) {
    if (opts.start->size() != tg.size()) throw DomainError("picard_solve: start has the wrong number of times");
    for (const auto& f : *opts.start) {
      require_same_grid(f.grid(), g, "picard_solve start");
      if (f.components() != g.n) throw DomainError("picard_solve: start must be a vector field");
    }
  }
  SpecTraj cur(tg.size()), next;
  for (std::size_t i = 0; i < tg.size(); ++i) {
    if (opts.start)
      cur[i] = spectra(as_physical(opts.start->at(i)));
    else if (opts.zero_start)
      cur[i] = zeros(g, g.n);
    else
      heat_apply(g, u0hat, tg.t[i], cur[i]);
  }
  double linear_size = 0.0;
  {
    SpecTraj lin(tg.size());
    for (std::size_t i = 0; i < tg.size(); ++i) heat_apply(g, u0hat, tg.t[i], lin[i]);
    linear_size = x_total(g, tg, lin, mp);
  }
  const double floor = 1e-12 * linear_size;
  tr.converged = false;
  tr.status = "max_iter";
  for (int m = 1; m <= opts.max_iter; ++m) {
    const double diff = picard_step(g, tg, u0hat, cur, next, mp, quad);
    tr.history.push_back(diff);
    std::swap(cur, next);
    tr.iterations = m;
    if (!std::isfinite(diff)) {
      tr.status = "diverging";
      break;
    }
    if (diff < opts.tol) {
      tr.converged = true;
      tr.status = "converged";
      break;
    }
    const auto& h = tr.history;
    const std::size_t k = h.size();
    if (k >= 4 && h[k - 1] > h[k - 2] && h[k - 2] > h[k - 3] && h[k - 3] > h[k - 4]) {
      tr.status = "diverging";
      break;
    }
  }
  for (std::size_t m = 1; m < tr.history.size(); ++m)
    if (tr.history[m - 1] > floor) tr.contraction = std::max(tr.contraction, tr.history[m] / tr.history[m - 1]);
  for (auto& s : cur) tr.u.push_back(to_field(g, std::move(s)));
  tr.xnorm = x_norm(tr, mp);
  return tr;
}

double fixed_point_residual(const Trajectory& uT, const Field& u0, const MildParams& mp, const QuadConfig& quad) {
  if (uT.u.empty()) throw DomainError("fixed_point_residual: empty trajectory");
  const Grid& g = uT.u.front().grid();
  const SpecTraj cur = to_spec(uT);
  SpecTraj next;
  Field u0p = as_physical(u0);
  if (divergence_defect(u0p) > 1e-10) u0p = leray_project(u0p);
  return picard_step(g, uT.times, spectra(u0p), cur, next, mp, quad);
}

double x_distance(const Trajectory& a, const Trajectory& b, const MildParams& mp) {
  check_pair(a, b, "x_distance");
  const Grid& g = a.u.front().grid();
  double p1 = 0.0, p2 = 0.0;
  for (std::size_t i = 0; i < a.u.size(); ++i) {
    const auto x = x_parts_at(g, spectra(a.u[i] - b.u[i]), a.times.t[i], mp, {}, {});
    p1 = std::max(p1, x.part1);
    p2 = std::max(p2, x.part2);
  }
  return p1 + p2;
}

Trajectory reference_solve(const Field& u0_in, const TimeGrid& tg, const ReferenceOptions& opts) {
  check_vector(u0_in, "reference_solve");
  if (!(opts.dt > 0.0)) throw ConfigError("reference_solve: dt must be positive");
  const Grid& g = u0_in.grid();
  const auto& lat = lattice(g);
  const int n = g.n;
  const std::size_t M = g.size();
  Trajectory tr;
  tr.times = tg;
  Field u0 = as_physical(u0_in);
  if (divergence_defect(u0) > 1e-10) {
    u0 = leray_project(u0);
    tr.warnings.push_back("initial data was not divergence-free and has been projected");
  }
  VecSpec u = spectra(u0);
  Nonlinear nl(g);
  VecSpec k1, k2, k3, k4, tmp(n, Spectrum(M));
  auto rhs = [&](const VecSpec& s, VecSpec& out) {
    if (!opts.nonlinear) {
      out = zeros(g, n);
      return;
    }
    nl.eval(s, nullptr, out);
    for (auto& c : out)
      for (auto& x : c) x = -x;
  };
  double t = 0.0;
  for (double target : tg.t) {
    const double span = target - t;
    const int steps = span > 0.0 ? static_cast<int>(std::ceil(span / opts.dt - 1e-9)) : 0;
    const double dt = steps > 0 ? span / steps : 0.0;
    std::vector<double> E(M), E2(M);
    for (std::size_t m = 0; m < M; ++m) {
      E[m] = std::exp(-lat.xi2[m] * dt);
      E2[m] = std::exp(-lat.xi2[m] * dt / 2.0);
    }
    for (int s = 0; s < steps; ++s) {
      rhs(u, k1);
      if (opts.nonlinear) {
        const double cfl = dt * nl.umax() / g.h();
        if (cfl > opts.cfl_limit)
          throw DomainError("reference_solve: CFL number " + num(cfl) + " exceeds " + num(opts.cfl_limit) +
                            "; reduce the step size");
      }
      for (int a = 0; a < n; ++a)
        for (std::size_t m = 0; m < M; ++m) tmp[a][m] = E2[m] * (u[a][m] + 0.5 * dt * k1[a][m]);
      rhs(tmp, k2);
      for (int a = 0; a < n; ++a)
        for (std::size_t m = 0; m < M; ++m) tmp[a][m] = E2[m] * u[a][m] + 0.5 * dt * k2[a][m];
      rhs(tmp, k3);
      for (int a = 0; a < n; ++a)
        for (std::size_t m = 0; m < M; ++m) tmp[a][m] = E[m] * u[a][m] + dt * E2[m] * k3[a][m];
      rhs(tmp, k4);
      for (int a = 0; a < n; ++a)
        for (std::size_t m = 0; m < M; ++m)
          u[a][m] = E[m] * u[a][m] +
                    dt / 6.0 * (E[m] * k1[a][m] + 2.0 * E2[m] * (k2[a][m] + k3[a][m]) + k4[a][m]);
    }
    t = target;
    tr.u.push_back(to_field(g, u));
  }
  tr.iterations = 0;
  tr.status = "reference";
  return tr;
}

SelfSimilarReport self_similar_check(const Trajectory& uT, double lambda, double t_max) {
  if (uT.u.empty()) throw DomainError("self_similar_check: empty trajectory");
  if (!(lambda > 0.0)) throw DomainError("self_similar_check: lambda must be positive");
  const TimeGrid& tg = uT.times;
  SelfSimilarReport rep;
  rep.lambda = lambda;
  if (lambda != 1.0) {
    if (!(tg.rho > 1.0)) throw DomainError("self_similar_check: time grid is not geometric");
    const double m = 2.0 * std::log(lambda) / std::log(tg.rho);
    rep.shift = static_cast<int>(std::lround(m));
    if (std::abs(std::pow(tg.rho, rep.shift / 2.0) - lambda) > 1e-9 * lambda)
      throw DomainError("self_similar_check: lambda = " + num(lambda) + " is not rho^{m/2} for the time grid");
  }
  const Grid& g = uT.u.front().grid();
  const auto& lat = lattice(g);
  rep.r_inner = 8.0 * g.h();
  rep.r_outer = std::min(g.L / 2.0, g.L / (2.0 * lambda));
  const int M = static_cast<int>(tg.size());
  for (int i = 0; i < M; ++i) {
    const int j = i + rep.shift;
    if (j < 0 || j >= M || tg.t[i] > t_max) continue;
    const Field& a = uT.u[i];
    const Field b = rescale(uT.u[j], lambda);
    double num2 = 0.0, den2 = 0.0;
    for (std::size_t m = 0; m < g.size(); ++m) {
      const double r = lat.radius[m];
      if (r < rep.r_inner || r >= rep.r_outer) continue;
      for (int c = 0; c < a.components(); ++c) {
        const double d = a.comp(c)[m] - b.comp(c)[m];
        num2 += d * d;
        den2 += a.comp(c)[m] * a.comp(c)[m];
      }
    }
    const double err = den2 > 0.0 ? std::sqrt(num2 / den2) : (num2 > 0.0 ? inf : 0.0);
    rep.times.push_back(tg.t[i]);
    rep.errors.push_back(err);
    rep.max_error = std::max(rep.max_error, err);
  }
  if (rep.times.empty()) throw DomainError("self_similar_check: no matched times");
  return rep;
}

double pair(const Field& g, const Field& phi) {
  require_same_grid(g.grid(), phi.grid(), "pair");
  if (g.components() != phi.components()) throw DomainError("pair: component counts differ");
  const Field a = as_physical(g), b = as_physical(phi);
  double s = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) s += a.values()[i] * b.values()[i];
  return s * g.grid().cell_volume();
}

DecayCurve asymptotic_compare(const Trajectory& uT, const Trajectory& vT, const MildParams& mp) {
  check_pair(uT, vT, "asymptotic_compare");
  DecayCurve c;
  c.times = uT.times.t;
  for (std::size_t i = 0; i < uT.u.size(); ++i)
    c.values.push_back(besov_wh_norm(uT.u[i] - vT.u[i], mp.critical()).aggregate);
  int dec = 0;
  for (std::size_t i = 1; i < c.values.size(); ++i) dec += c.values[i] < c.values[i - 1];
  c.trend = c.values.size() > 1 ? static_cast<double>(dec) / (c.values.size() - 1) : 0.0;
  c.final_ratio = c.values.front() > 0.0 ? c.values.back() / c.values.front() : 0.0;
  return c;
}

void save_trajectory(const Trajectory& tr, const std::filesystem::path& dir, const std::optional<MildParams>& mp) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create trajectory directory " + dir.string() + ": " + ec.message());
  nlohmann::ordered_json j;
  if (mp)
    j["params"] = {{"n", mp->n},      {"p", exponent_text(mp->p)}, {"q", exponent_text(mp->q)},
                   {"alpha", mp->alpha}, {"s", mp->s},               {"w", mp->w}};
  j["rho"] = tr.times.rho;
  j["times"] = tr.times.t;
  j["history"] = tr.history;
  j["converged"] = tr.converged;
  j["iterations"] = tr.iterations;
  j["contraction"] = tr.contraction;
  j["status"] = tr.status;
  j["warnings"] = tr.warnings;
  auto files = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < tr.u.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "u_%03zu.bhf", i);
    write_field(tr.u[i], dir / name);
    files.push_back(name);
  }
  j["files"] = files;
  std::ofstream mf(dir / "manifest.json");
  if (!mf) throw FormatError("cannot write " + (dir / "manifest.json").string());
  mf << j.dump(2) << "\n";
  std::ofstream hf(dir / "history.csv");
  if (!hf) throw FormatError("cannot write " + (dir / "history.csv").string());
  hf.precision(17);
  hf << "iteration,x_norm_diff\n";
  for (std::size_t i = 0; i < tr.history.size(); ++i) hf << i + 1 << "," << tr.history[i] << "\n";
}

Trajectory load_trajectory(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw FormatError("missing " + (dir / "manifest.json").string());
  nlohmann::json j;
  try {
    mf >> j;
  } catch (const std::exception& e) {
    throw FormatError("manifest.json: " + std::string(e.what()));
  }
  Trajectory tr;
  tr.times = explicit_grid(j.at("times").get<std::vector<double>>());
  tr.times.rho = j.value("rho", 0.0);
  tr.history = j.value("history", std::vector<double>{});
  tr.converged = j.value("converged", true);
  tr.iterations = j.value("iterations", 0);
  tr.contraction = j.value("contraction", 0.0);
  tr.status = j.value("status", std::string("ok"));
  tr.warnings = j.value("warnings", std::vector<std::string>{});
  const auto files = j.at("files").get<std::vector<std::string>>();
  if (files.size() != tr.times.size()) throw FormatError("manifest.json: file count differs from time count");
  for (const auto& f : files) tr.u.push_back(read_field(dir / f));
  return tr;
}

}  // namespace bhk
