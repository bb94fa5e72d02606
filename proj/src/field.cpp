#include "bhk/field.hpp"

#include <cmath>

#include "bhk/fft.hpp"

namespace bhk {

Field::Field(const Grid& g, int components, Rep rep)
    : Field(g, components, rep, std::vector<double>(static_cast<std::size_t>(components) * g.size(), 0.0)) {}

Field::Field(const Grid& g, int components, Rep rep, std::vector<double> values)
    : grid_(g), components_(components), rep_(rep), values_(std::move(values)) {
  if (components != 1 && components != g.n)
    throw DomainError("field components must be 1 or n=" + std::to_string(g.n) + ", got " + std::to_string(components));
  if (values_.size() != static_cast<std::size_t>(components) * g.size())
    throw DomainError("field array length " + std::to_string(values_.size()) + " does not match components*N^n = " +
                      std::to_string(static_cast<std::size_t>(components) * g.size()));
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("field contains a non-finite sample");
}

std::vector<double> Field::modulus() const {
  const std::size_t M = points();
  std::vector<double> m(M, 0.0);
  if (components_ == 1) {
    for (std::size_t i = 0; i < M; ++i) m[i] = std::abs(values_[i]);
    return m;
  }
  for (int c = 0; c < components_; ++c) {
    const double* v = values_.data() + c * M;
    for (std::size_t i = 0; i < M; ++i) m[i] += v[i] * v[i];
  }
  for (auto& x : m) x = std::sqrt(x);
  return m;
}

double Field::max_abs() const {
  double mx = 0.0;
  for (double v : modulus()) mx = std::max(mx, v);
  return mx;
}

Field combine(double a, const Field& f, double b, const Field& g) {
  require_same_grid(f.grid(), g.grid(), "combine");
  if (f.components() != g.components() || f.rep() != g.rep()) throw DomainError("combine: shape mismatch");
  std::vector<double> v(f.values().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * f.values()[i] + b * g.values()[i];
  return Field(f.grid(), f.components(), f.rep(), std::move(v));
}

Field operator+(const Field& a, const Field& b) { return combine(1.0, a, 1.0, b); }
Field operator-(const Field& a, const Field& b) { return combine(1.0, a, -1.0, b); }

Field operator*(double c, const Field& a) {
  std::vector<double> v(a.values());
  for (auto& x : v) x *= c;
  return Field(a.grid(), a.components(), a.rep(), std::move(v));
}

Field component_field(const Field& f, int c) {
  if (c < 0 || c >= f.components()) throw DomainError("component index out of range");
  auto s = f.comp(c);
  return Field(f.grid(), 1, f.rep(), std::vector<double>(s.begin(), s.end()));
}

Field stack(const std::vector<Field>& scalars) {
  if (scalars.empty()) throw DomainError("stack: no components");
  const Grid& g = scalars[0].grid();
  std::vector<double> v;
  v.reserve(scalars.size() * g.size());
  for (const auto& s : scalars) {
    require_same_grid(g, s.grid(), "stack");
    if (s.components() != 1) throw DomainError("stack expects scalar fields");
    v.insert(v.end(), s.values().begin(), s.values().end());
  }
  return Field(g, static_cast<int>(scalars.size()), scalars[0].rep(), std::move(v));
}

std::vector<Spectrum> spectra(const Field& f) {
  const Grid& g = f.grid();
  const std::size_t M = g.size();
  std::vector<Spectrum> out(f.components());
  if (f.rep() == Rep::physical) {
    for (int c = 0; c < f.components(); ++c) out[c] = fft_forward(g, f.comp(c).data());
    return out;
  }
  const auto& neg = lattice(g).neg;
  for (int c = 0; c < f.components(); ++c) {
    auto H = f.comp(c);
    Spectrum s(M);
    for (std::size_t k = 0; k < M; ++k) {
      const double a = H[k], b = H[neg[k]];
      s[k] = cplx(0.5 * (a + b), -0.5 * (a - b));
    }
    out[c] = std::move(s);
  }
  return out;
}

Field from_spectra(const Grid& g, std::vector<Spectrum> s, Rep out) {
  const std::size_t M = g.size();
  const int comps = static_cast<int>(s.size());
  std::vector<double> v(comps * M);
  if (out == Rep::physical) {
    for (int c = 0; c < comps; ++c) fft_inverse_real(g, s[c].data(), v.data() + c * M);
  } else {
    const auto& neg = lattice(g).neg;
    for (int c = 0; c < comps; ++c)
      for (std::size_t k = 0; k < M; ++k) {
        const cplx h = 0.5 * (s[c][k] + std::conj(s[c][neg[k]]));
        v[c * M + k] = h.real() - h.imag();
      }
  }
  return Field(g, comps, out, std::move(v));
}

Field to_spectral(const Field& f) {
  if (f.rep() != Rep::physical) throw DomainError("to_spectral: field is already spectral");
  const Grid& g = f.grid();
  const std::size_t M = g.size();
  std::vector<double> v(f.values().size());
  for (int c = 0; c < f.components(); ++c) {
    Spectrum s = fft_forward(g, f.comp(c).data());
    for (std::size_t k = 0; k < M; ++k) v[c * M + k] = s[k].real() - s[k].imag();
  }
  return Field(g, f.components(), Rep::spectral, std::move(v));
}

Field to_physical(const Field& f) {
  if (f.rep() != Rep::spectral) throw DomainError("to_physical: field is already physical");
  return from_spectra(f.grid(), spectra(f), Rep::physical);
}

Field as_physical(const Field& f) { return f.rep() == Rep::physical ? f : to_physical(f); }

}  // namespace bhk
