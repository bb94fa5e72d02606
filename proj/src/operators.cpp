#include "bhk/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bhk/fft.hpp"

namespace bhk {

MultiplierSymbol identity_symbol() {
  return {[](const double*, int) { return cplx(1.0, 0.0); }, 0.0, 1.0, "identity"};
}

MultiplierSymbol heat_symbol(double t) {
  if (!(t >= 0.0)) throw DomainError("heat: negative time " + std::to_string(t));
  return {[t](const double* xi, int n) {
            double s = 0.0;
            for (int a = 0; a < n; ++a) s += xi[a] * xi[a];
            return cplx(std::exp(-t * s), 0.0);
          },
          0.0, 1.0, "heat"};
}

MultiplierSymbol riesz_symbol(int axis) {
  return {[axis](const double* xi, int n) {
            double s = 0.0;
            for (int a = 0; a < n; ++a) s += xi[a] * xi[a];
            return cplx(0.0, xi[axis] / std::sqrt(s));
          },
          0.0, 0.0, "riesz"};
}

MultiplierSymbol potential_symbol(double s) {
  return {[s](const double* xi, int n) {
            double r = 0.0;
            for (int a = 0; a < n; ++a) r += xi[a] * xi[a];
            return cplx(std::pow(r, 0.5 * s), 0.0);
          },
          s, 0.0, "riesz_potential"};
}

MultiplierSymbol quadratic_symbol(int a, int b) {
  return {[a, b](const double* xi, int n) {
            double r = 0.0;
            for (int c = 0; c < n; ++c) r += xi[c] * xi[c];
            return cplx(xi[a] * xi[b] / r, 0.0);
          },
          0.0, 0.0, "xi_a xi_b/|xi|^2"};
}

MultiplierSymbol leray_entry_symbol(int a, int b) {
  const double d = a == b ? 1.0 : 0.0;
  return {[a, b, d](const double* xi, int n) {
            double r = 0.0;
            for (int c = 0; c < n; ++c) r += xi[c] * xi[c];
            return cplx(d - xi[a] * xi[b] / r, 0.0);
          },
          0.0, d, "leray_entry"};
}

std::vector<cplx> sample_symbol(const Grid& g, const MultiplierSymbol& P) {
  const auto& lat = lattice(g);
  const std::size_t M = g.size();
  std::vector<cplx> out(M);
  double xi[3] = {0, 0, 0};
  for (std::size_t k = 0; k < M; ++k) {
    if (lat.xi2[k] == 0.0) {
      out[k] = P.zero_value;
      continue;
    }
    for (int a = 0; a < g.n; ++a) xi[a] = lat.xi[a][k];
    const cplx v = P.fn(xi, g.n);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream os;
      os << "multiplier '" << P.name << "' is not finite at lattice point |xi|=" << lat.absxi[k];
      throw DomainError(os.str());
    }
    out[k] = v;
  }
  if (!std::isfinite(P.zero_value.real()) || !std::isfinite(P.zero_value.imag()))
    throw DomainError("multiplier '" + P.name + "' has a non-finite zero-frequency value");
  return out;
}

Field apply_multiplier(const Field& f, const MultiplierSymbol& P) {
  const auto sym = sample_symbol(f.grid(), P);
  auto s = spectra(f);
  for (auto& comp : s)
    for (std::size_t k = 0; k < comp.size(); ++k) comp[k] *= sym[k];
  return from_spectra(f.grid(), std::move(s), f.rep());
}

Field riesz_transform(const Field& f, int axis) {
  if (f.components() != 1) throw DomainError("riesz_transform expects a scalar field");
  if (axis < 0 || axis >= f.grid().n) throw DomainError("riesz_transform: axis " + std::to_string(axis) + " out of range");
  return apply_multiplier(f, riesz_symbol(axis));
}

Field heat(const Field& f, double t) { return apply_multiplier(f, heat_symbol(t)); }

Field leray_project(const Field& u) {
  const Grid& g = u.grid();
  if (u.components() != g.n)
    throw DomainError("leray_project expects " + std::to_string(g.n) + " components, got " + std::to_string(u.components()));
  const auto& lat = lattice(g);
  auto s = spectra(u);
  const std::size_t M = g.size();
  int idx[3];
  for (std::size_t k = 0; k < M; ++k) {
    if (lat.xi2[k] == 0.0) continue;
    unravel(k, g.n, g.N, idx);
    // Nyquist planes have no consistent real projection; drop them
    if (std::any_of(idx, idx + g.n, [&](int i) { return i == g.N / 2; })) {
      for (int a = 0; a < g.n; ++a) s[a][k] = 0.0;
      continue;
    }
    cplx dot = 0.0;
    for (int a = 0; a < g.n; ++a) dot += lat.xi[a][k] * s[a][k];
    dot /= lat.xi2[k];
    for (int a = 0; a < g.n; ++a) s[a][k] -= lat.xi[a][k] * dot;
  }
  return from_spectra(g, std::move(s), u.rep());
}

Field gradient(const Field& f) {
  if (f.components() != 1) throw DomainError("gradient expects a scalar field");
  const Grid& g = f.grid();
  const auto& lat = lattice(g);
  const Spectrum s = spectra(f)[0];
  std::vector<Spectrum> out(g.n, s);
  for (int a = 0; a < g.n; ++a)
    for (std::size_t k = 0; k < s.size(); ++k) out[a][k] *= cplx(0.0, lat.xi[a][k]);
  return from_spectra(g, std::move(out), f.rep());
}

Field divergence(const Field& u) {
  const Grid& g = u.grid();
  if (u.components() != g.n) throw DomainError("divergence expects a vector field");
  const auto& lat = lattice(g);
  auto s = spectra(u);
  Spectrum d(g.size(), 0.0);
  for (int a = 0; a < g.n; ++a)
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += cplx(0.0, lat.xi[a][k]) * s[a][k];
  return from_spectra(g, {std::move(d)}, u.rep());
}

double divergence_defect(const Field& u) {
  const Grid& g = u.grid();
  if (u.components() != g.n) throw DomainError("divergence_defect expects a vector field");
  const auto& lat = lattice(g);
  auto s = spectra(u);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    cplx dot = 0.0;
    double mod = 0.0;
    for (int a = 0; a < g.n; ++a) {
      dot += lat.xi[a][k] * s[a][k];
      mod += std::norm(s[a][k]);
    }
    num = std::max(num, std::abs(dot));
    den = std::max(den, std::sqrt(mod));
  }
  return den > 0.0 ? num / den : 0.0;
}

Field convolve(const Field& theta, const Field& f) {
  require_same_grid(theta.grid(), f.grid(), "convolve");
  if (theta.rep() != Rep::physical || f.rep() != Rep::physical) throw DomainError("convolve expects physical fields");
  if (theta.components() != 1 || f.components() != 1) throw DomainError("convolve expects scalar fields");
  const Grid& g = f.grid();
  const std::size_t M = g.size();
  // move the origin sample (index N/2 on each axis) to index 0
  std::vector<double> shifted(M);
  int idx[3];
  for (std::size_t m = 0; m < M; ++m) {
    unravel(m, g.n, g.N, idx);
    std::size_t dst = 0, stride = 1;
    for (int a = 0; a < g.n; ++a) {
      dst += static_cast<std::size_t>((idx[a] + g.N / 2) % g.N) * stride;
      stride *= g.N;
    }
    shifted[dst] = theta.values()[m];
  }
  Spectrum a = fft_forward(g, shifted.data());
  Spectrum b = fft_forward(g, f.values().data());
  const double vol = g.cell_volume();
  for (std::size_t k = 0; k < M; ++k) a[k] *= b[k] * vol;
  return Field(g, 1, Rep::physical, fft_inverse_real(g, std::move(a)));
}

namespace {

// row i holds the weights reproducing the trigonometric interpolant at lambda*x_i
std::vector<double> interpolation_matrix(const Grid& g, double lambda, bool& wraps) {
  const int N = g.N;
  const double h = g.h();
  std::vector<double> W(static_cast<std::size_t>(N) * N, 0.0);
  for (int i = 0; i < N; ++i) {
    const double y = lambda * g.x(i);
    if (y < -g.L || y >= g.L) wraps = true;
    // position in cells relative to x_0, reduced to [0, N)
    double c = (y + g.L) / h;
    c = std::fmod(c, static_cast<double>(N));
    if (c < 0) c += N;
    const double r = std::nearbyint(c);
    double* row = W.data() + static_cast<std::size_t>(i) * N;
    if (std::abs(c - r) < 1e-9) {
      row[static_cast<int>(r) % N] = 1.0;
      continue;
    }
    for (int m = 0; m < N; ++m) {
      const double th = 2.0 * M_PI * (c - m) / N;
      const double sh = std::sin(0.5 * th);
      row[m] = (std::sin(0.5 * (N - 1) * th) / sh + std::cos(0.5 * N * th)) / N;
    }
  }
  return W;
}

void apply_along_axis(const Grid& g, const std::vector<double>& W, int axis, std::vector<double>& data) {
  const int N = g.N;
  const std::size_t M = g.size();
  std::size_t stride = 1;
  for (int a = 0; a < axis; ++a) stride *= N;
  std::vector<double> out(M, 0.0);
  std::vector<double> line(N), res(N);
  for (std::size_t base = 0; base < M; ++base) {
    if ((base / stride) % N != 0) continue;
    for (int m = 0; m < N; ++m) line[m] = data[base + m * stride];
    for (int i = 0; i < N; ++i) {
      const double* row = W.data() + static_cast<std::size_t>(i) * N;
      double acc = 0.0;
      for (int m = 0; m < N; ++m) acc += row[m] * line[m];
      res[i] = acc;
    }
    for (int i = 0; i < N; ++i) out[base + i * stride] = res[i];
  }
  data.swap(out);
}

}  // namespace

Field rescale(const Field& f, double lambda, RescaleInfo* info) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("rescale: lambda must be positive");
  const Field p = as_physical(f);
  const Grid& g = p.grid();
  bool wraps = false;
  const auto W = interpolation_matrix(g, lambda, wraps);
  if (info) info->wraps = wraps;
  const std::size_t M = g.size();
  std::vector<double> v(p.values().size());
  for (int c = 0; c < p.components(); ++c) {
    std::vector<double> data(p.comp(c).begin(), p.comp(c).end());
    for (int a = 0; a < g.n; ++a) apply_along_axis(g, W, a, data);
    for (std::size_t m = 0; m < M; ++m) v[c * M + m] = lambda * data[m];
  }
  Field out(g, p.components(), Rep::physical, std::move(v));
  return f.rep() == Rep::physical ? out : to_spectral(out);
}

int dealias_cutoff(const Grid& g) { return (g.N - 1) / 3; }

void dealias_inplace(const Grid& g, Spectrum& s) {
  const int K = dealias_cutoff(g);
  int idx[3];
  for (std::size_t m = 0; m < s.size(); ++m) {
    unravel(m, g.n, g.N, idx);
    for (int a = 0; a < g.n; ++a)
      if (std::abs(g.wave(idx[a])) > K) {
        s[m] = 0.0;
        break;
      }
  }
}

Field dealias(const Field& f) {
  auto s = spectra(f);
  for (auto& c : s) dealias_inplace(f.grid(), c);
  return from_spectra(f.grid(), std::move(s), f.rep());
}

Field dealiased_product(const Field& f, const Field& g) {
  require_same_grid(f.grid(), g.grid(), "dealiased_product");
  if (f.components() != 1 || g.components() != 1) throw DomainError("dealiased_product expects scalar fields");
  const Grid& gr = f.grid();
  const Field a = as_physical(dealias(f));
  const Field b = as_physical(dealias(g));
  std::vector<double> v(gr.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] * b.values()[i];
  Field out = dealias(Field(gr, 1, Rep::physical, std::move(v)));
  return f.rep() == Rep::physical ? out : to_spectral(out);
}

}  // namespace bhk
