#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bhk/grid.hpp"

namespace bhk {

enum class Rep : std::uint32_t { physical = 0, spectral = 1 };

// Samples on a grid. Spectral fields store the Hartley transform H = Re F - Im F
// of each real component, which keeps the array real and the same length.
class Field {
 public:
  Field() = default;
  Field(const Grid& g, int components, Rep rep = Rep::physical);
  Field(const Grid& g, int components, Rep rep, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  int components() const { return components_; }
  Rep rep() const { return rep_; }
  bool empty() const { return values_.empty(); }
  std::size_t points() const { return grid_.size(); }

  const std::vector<double>& values() const { return values_; }
  std::span<const double> comp(int c) const { return {values_.data() + c * points(), points()}; }
  std::span<double> comp(int c) { return {values_.data() + c * points(), points()}; }

  // pointwise Euclidean modulus over components (physical fields)
  std::vector<double> modulus() const;
  double max_abs() const;

 private:
  Grid grid_;
  int components_ = 0;
  Rep rep_ = Rep::physical;
  std::vector<double> values_;
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double c, const Field& a);
Field combine(double a, const Field& f, double b, const Field& g);
Field component_field(const Field& f, int c);
Field stack(const std::vector<Field>& scalars);

// complex spectra of each component regardless of storage
std::vector<Spectrum> spectra(const Field& f);
// physical (or Hartley-packed) field from complex spectra; only the Hermitian part survives
Field from_spectra(const Grid& g, std::vector<Spectrum> s, Rep out = Rep::physical);

Field to_spectral(const Field& f);
Field to_physical(const Field& f);
Field as_physical(const Field& f);

}  // namespace bhk
