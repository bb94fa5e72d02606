#include "bhk/presets.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <random>
#include <set>

#include "bhk/fft.hpp"
#include "bhk/operators.hpp"

namespace bhk {

namespace {

class Params {
 public:
  Params(const std::string& preset, const PresetParams& p, std::set<std::string> allowed) : preset_(preset), p_(p) {
    for (const auto& [k, v] : p)
      if (!allowed.count(k)) throw ConfigError("preset " + preset + ": unknown parameter '" + k + "'");
  }
  double get(const std::string& key, double def) const {
    auto it = p_.find(key);
    return it == p_.end() ? def : it->second;
  }
  double need(const std::string& key) const {
    auto it = p_.find(key);
    if (it == p_.end()) throw ConfigError("preset " + preset_ + ": missing parameter '" + key + "'");
    return it->second;
  }
  int integer(const std::string& key, double def) const {
    const double v = get(key, def);
    if (v != std::floor(v)) throw ConfigError("preset " + preset_ + ": parameter '" + key + "' must be an integer");
    return static_cast<int>(v);
  }

 private:
  std::string preset_;
  const PresetParams& p_;
};

template <class F>
Field sample_scalar(const Grid& g, F&& fn) {
  const auto& lat = lattice(g);
  const std::size_t M = g.size();
  std::vector<double> v(M);
  double x[3] = {0, 0, 0};
  for (std::size_t m = 0; m < M; ++m) {
    for (int a = 0; a < g.n; ++a) x[a] = lat.pos[a][m];
    v[m] = fn(x, lat.radius[m]);
  }
  return Field(g, 1, Rep::physical, std::move(v));
}

int components_param(const Params& P, const Grid& g) {
  const int c = P.integer("components", 1);
  if (c != 1 && c != g.n) throw ConfigError("components must be 1 or n");
  return c;
}

// DFT slot for an integer wave vector
std::size_t slot(const Grid& g, const int* k) {
  std::size_t s = 0, stride = 1;
  for (int a = 0; a < g.n; ++a) {
    s += static_cast<std::size_t>((k[a] % g.N + g.N) % g.N) * stride;
    stride *= g.N;
  }
  return s;
}

// f(x) = 2 sum_k Re(c_k e^{i xi_k . x}) over canonical k
Field synthesize(const Grid& g, const std::vector<std::array<int, 3>>& ks, const std::vector<std::vector<cplx>>& coef,
                 int comps) {
  const std::size_t M = g.size();
  std::vector<Spectrum> s(comps, Spectrum(M, 0.0));
  for (std::size_t i = 0; i < ks.size(); ++i) {
    int k[3] = {ks[i][0], ks[i][1], ks[i][2]}, mk[3] = {-k[0], -k[1], -k[2]};
    int sum = 0;
    for (int a = 0; a < g.n; ++a) sum += k[a];
    const double sign = (sum % 2 == 0) ? 1.0 : -1.0;
    for (int c = 0; c < comps; ++c) {
      const cplx F = static_cast<double>(M) * sign * coef[i][c];
      s[c][slot(g, k)] += F;
      s[c][slot(g, mk)] += std::conj(F);
    }
  }
  return from_spectra(g, std::move(s), Rep::physical);
}

bool canonical(const std::array<int, 3>& k, int n) {
  for (int a = 0; a < n; ++a) {
    if (k[a] > 0) return true;
    if (k[a] < 0) return false;
  }
  return false;
}

std::vector<std::array<int, 3>> lattice_ball(const Grid& g, double lo, double hi) {
  const double dk = g.dxi();
  const int K = static_cast<int>(std::ceil(hi / dk)) + 1;
  if (K >= g.N / 2) throw ConfigError("requested band exceeds the grid's Nyquist frequency");
  std::vector<std::array<int, 3>> out;
  const int kz = g.n == 3 ? K : 0;
  for (int a = -K; a <= K; ++a)
    for (int b = -K; b <= K; ++b)
      for (int c = -kz; c <= kz; ++c) {
        std::array<int, 3> k{a, b, c};
        if (!canonical(k, g.n)) continue;
        const double r = dk * std::sqrt(double(a) * a + double(b) * b + double(c) * c);
        if (r > lo && r < hi) out.push_back(k);
      }
  return out;
}

void check_j(const Grid& g, int j, const char* preset) {
  if (j < g.j_min || j > g.j_max)
    throw ConfigError(std::string("preset ") + preset + ": block j=" + std::to_string(j) + " outside resolvable range [" +
                      std::to_string(g.j_min) + "," + std::to_string(g.j_max) + "]");
}

std::array<double, 3> perpendicular(const std::array<double, 3>& xi, int n) {
  std::array<double, 3> e{0, 0, 0};
  if (n == 2) {
    e = {-xi[1], xi[0], 0.0};
  } else {
    // xi x e_z, or xi x e_x when xi is along e_z
    e = {xi[1], -xi[0], 0.0};
    if (std::hypot(e[0], e[1]) < 1e-12) e = {0.0, xi[2], -xi[1]};
  }
  const double r = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
  for (auto& v : e) v /= r;
  return e;
}

}  // namespace

double power_cell_average(int n, double a, double h) {
  if (a >= n) throw ConfigError("cell average of |x|^{-a} diverges for a >= n");
  // the cube is 2n pyramids over faces at distance d; each contributes d/(n-a) * int_face |y|^{-a}
  const double d = 0.5 * h;
  using GL = boost::math::quadrature::gauss<double, 20>;
  double face = 0.0;
  if (n == 2) {
    face = GL::integrate([&](double y) { return std::pow(d * d + y * y, -0.5 * a); }, -d, d);
  } else {
    face = GL::integrate(
        [&](double y) { return GL::integrate([&](double z) { return std::pow(d * d + y * y + z * z, -0.5 * a); }, -d, d); },
        -d, d);
  }
  return 2.0 * n * d / (n - a) * face / std::pow(h, n);
}

std::array<double, 3> pure_block_frequency(const Grid& g, int j) {
  const double lo = 4.0 / 3.0 * std::ldexp(1.0, j), hi = 1.5 * std::ldexp(1.0, j);
  const double mid = 17.0 / 12.0 * std::ldexp(1.0, j);
  const auto ks = lattice_ball(g, lo, hi);
  if (ks.empty()) throw ConfigError("no lattice frequency inside the pure band of block j=" + std::to_string(j));
  const double dk = g.dxi();
  double best = 1e300;
  std::array<double, 3> out{0, 0, 0};
  for (const auto& k : ks) {
    const double r = dk * std::sqrt(double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2]);
    if (std::abs(r - mid) < best - 1e-12) {
      best = std::abs(r - mid);
      out = {dk * k[0], dk * k[1], dk * k[2]};
    }
  }
  return out;
}

std::vector<std::string> preset_names() {
  return {"power", "gaussian", "annulus_indicator", "rotational", "strictness_witness", "random_bandlimited",
          "pure_block", "vortex_pair", "bump", "heat_kernel", "delta"};
}

Field preset_field(const std::string& name, const PresetParams& params, const Grid& g) {
  const int n = g.n;
  const double h = g.h();

  if (name == "power") {
    Params P(name, params, {"a", "core"});
    const double a = P.need("a");
    const double core = P.get("core", 8.0);
    if (!(a > 0.0)) throw ConfigError("preset power: exponent a must be positive");
    if (core < 0.0) throw ConfigError("preset power: core must be >= 0");
    const double rc = core * h;
    const double origin = core > 0.0 ? std::pow(rc, -a) : power_cell_average(n, a, h);
    return sample_scalar(g, [&](const double*, double r) {
      if (r == 0.0) return origin;
      if (r < rc) return std::pow(rc, -a);
      return std::pow(r, -a);
    });
  }
  if (name == "gaussian") {
    Params P(name, params, {"sigma"});
    const double s = P.get("sigma", 1.0);
    if (!(s > 0.0)) throw ConfigError("preset gaussian: sigma must be positive");
    return sample_scalar(g, [&](const double*, double r) { return std::exp(-r * r / (2.0 * s * s)); });
  }
  if (name == "annulus_indicator") {
    Params P(name, params, {"k"});
    const int k = P.integer("k", 0);
    if (k < g.k_min || k > g.k_max)
      throw ConfigError("preset annulus_indicator: k=" + std::to_string(k) + " outside resolvable range [" +
                        std::to_string(g.k_min) + "," + std::to_string(g.k_max) + "]");
    const double lo = std::ldexp(1.0, k - 1), hi = std::ldexp(1.0, k);
    return sample_scalar(g, [&](const double*, double r) { return (r >= lo && r < hi) ? 1.0 : 0.0; });
  }
  if (name == "rotational") {
    Params P(name, params, {});
    const auto& lat = lattice(g);
    const std::size_t M = g.size();
    std::vector<double> v(n * M, 0.0);
    for (std::size_t m = 0; m < M; ++m) {
      const double r2 = lat.radius[m] * lat.radius[m];
      if (r2 == 0.0) continue;
      v[m] = -lat.pos[1][m] / r2;
      v[M + m] = lat.pos[0][m] / r2;
    }
    return Field(g, n, Rep::physical, std::move(v));
  }
  if (name == "strictness_witness") {
    Params P(name, params, {"p", "m", "radius"});
    const double p = P.need("p");
    if (!(p > 1.0)) throw ConfigError("preset strictness_witness: p must exceed 1");
    const double rad = P.get("radius", 0.125);
    int mmax = 0;
    while (1.5 * std::ldexp(1.0, mmax) + rad < g.L) ++mmax;
    const int m = P.integer("m", mmax);
    if (m < 1 || m > mmax)
      throw ConfigError("preset strictness_witness: m must lie in [1," + std::to_string(mmax) + "] for this grid");
    const double a = n / p;
    const double avg = power_cell_average(n, a, h);
    return sample_scalar(g, [&](const double* x, double) {
      double v = 0.0;
      for (int k = 1; k <= m; ++k) {
        double d2 = 0.0;
        for (int c = 0; c < n; ++c) {
          const double y = x[c] - (c == 0 ? 1.5 * std::ldexp(1.0, k - 1) : 0.0);
          d2 += y * y;
        }
        const double d = std::sqrt(d2);
        if (d < rad) v += d < 0.5 * h ? avg : std::pow(d, -a);
      }
      return v;
    });
  }
  if (name == "random_bandlimited") {
    Params P(name, params, {"j", "seed", "components"});
    const int j = P.integer("j", 0);
    check_j(g, j, "random_bandlimited");
    const auto seed = static_cast<std::uint64_t>(P.get("seed", 0.0));
    const int comps = components_param(P, g);
    const auto ks = lattice_ball(g, 0.75 * std::ldexp(1.0, j), 8.0 / 3.0 * std::ldexp(1.0, j));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N01(0.0, 1.0);
    std::vector<std::vector<cplx>> coef(ks.size(), std::vector<cplx>(comps));
    double energy = 0.0;
    const double dk = g.dxi();
    for (std::size_t i = 0; i < ks.size(); ++i) {
      for (int c = 0; c < comps; ++c) {
        const double re = N01(rng), im = N01(rng);
        coef[i][c] = cplx(re, im);
      }
      if (comps > 1) {
        cplx dot = 0.0;
        double xi2 = 0.0;
        for (int c = 0; c < n; ++c) {
          dot += dk * ks[i][c] * coef[i][c];
          xi2 += dk * ks[i][c] * dk * ks[i][c];
        }
        for (int c = 0; c < n; ++c) coef[i][c] -= dk * ks[i][c] * dot / xi2;
      }
      for (int c = 0; c < comps; ++c) energy += std::norm(coef[i][c]);
    }
    if (energy > 0.0) {
      const double scale = 1.0 / std::sqrt(2.0 * energy);
      for (auto& row : coef)
        for (auto& c : row) c *= scale;
    }
    return synthesize(g, ks, coef, comps);
  }
  if (name == "pure_block") {
    Params P(name, params, {"j", "components", "amplitude"});
    const int j = P.integer("j", 0);
    check_j(g, j, "pure_block");
    const int comps = components_param(P, g);
    const double amp = P.get("amplitude", 1.0);
    const auto xi = pure_block_frequency(g, j);
    const auto e = perpendicular(xi, n);
    const auto& lat = lattice(g);
    const std::size_t M = g.size();
    std::vector<double> v(comps * M);
    for (std::size_t m = 0; m < M; ++m) {
      double ph = 0.0;
      for (int a = 0; a < n; ++a) ph += xi[a] * lat.pos[a][m];
      const double c = amp * std::cos(ph);
      if (comps == 1)
        v[m] = c;
      else
        for (int a = 0; a < n; ++a) v[a * M + m] = e[a] * c;
    }
    return Field(g, comps, Rep::physical, std::move(v));
  }
  if (name == "vortex_pair") {
    Params P(name, params, {"d", "sigma", "gamma"});
    if (n != 2) throw ConfigError("preset vortex_pair is two-dimensional");
    const double d = P.get("d", 1.5), s = P.get("sigma", 0.75), gam = P.get("gamma", 1.0);
    if (!(s > 0.0)) throw ConfigError("preset vortex_pair: sigma must be positive");
    const auto& lat = lattice(g);
    const std::size_t M = g.size();
    std::vector<double> v(2 * M);
    // stream function psi = gamma (e^{-|x-a|^2/2s^2} - e^{-|x+a|^2/2s^2}), u = (d_y psi, -d_x psi)
    for (std::size_t m = 0; m < M; ++m) {
      const double x = lat.pos[0][m], y = lat.pos[1][m];
      const double g1 = std::exp(-((x - d) * (x - d) + y * y) / (2 * s * s));
      const double g2 = std::exp(-((x + d) * (x + d) + y * y) / (2 * s * s));
      const double dpx = gam * (-(x - d) * g1 + (x + d) * g2) / (s * s);
      const double dpy = gam * (-y * g1 + y * g2) / (s * s);
      v[m] = dpy;
      v[M + m] = -dpx;
    }
    return Field(g, 2, Rep::physical, std::move(v));
  }
  if (name == "bump") {
    Params P(name, params, {"radius", "cx", "cy", "cz"});
    const double R = P.get("radius", 2.0);
    const double c[3] = {P.get("cx", 0.0), P.get("cy", 0.0), P.get("cz", 0.0)};
    if (!(R > 0.0)) throw ConfigError("preset bump: radius must be positive");
    return sample_scalar(g, [&](const double* x, double) {
      double r2 = 0.0;
      for (int a = 0; a < n; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
      const double u = r2 / (R * R);
      return u < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u)) : 0.0;
    });
  }
  if (name == "heat_kernel") {
    Params P(name, params, {"t"});
    const double t = P.need("t");
    if (!(t > 0.0)) throw ConfigError("preset heat_kernel: t must be positive");
    const double norm = std::pow(4.0 * M_PI * t, -0.5 * n);
    return sample_scalar(g, [&](const double*, double r) { return norm * std::exp(-r * r / (4.0 * t)); });
  }
  if (name == "delta") {
    Params P(name, params, {});
    const double v = 1.0 / g.cell_volume();
    return sample_scalar(g, [&](const double*, double r) { return r == 0.0 ? v : 0.0; });
  }
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace bhk
