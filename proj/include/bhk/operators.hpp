#pragma once

#include <functional>
#include <string>

#include "bhk/field.hpp"

namespace bhk {

struct MultiplierSymbol {
  // evaluated at nonzero lattice points only
  std::function<cplx(const double* xi, int n)> fn;
  double order = 0.0;
  cplx zero_value = 0.0;
  std::string name;
};

MultiplierSymbol identity_symbol();
MultiplierSymbol heat_symbol(double t);
MultiplierSymbol riesz_symbol(int axis);
MultiplierSymbol potential_symbol(double s);
// xi_a xi_b / |xi|^2
MultiplierSymbol quadratic_symbol(int a, int b);
// entry (a,b) of the Leray projector symbol
MultiplierSymbol leray_entry_symbol(int a, int b);

std::vector<cplx> sample_symbol(const Grid& g, const MultiplierSymbol& P);

Field apply_multiplier(const Field& f, const MultiplierSymbol& P);
Field riesz_transform(const Field& f, int axis);
Field leray_project(const Field& u);
Field heat(const Field& f, double t);
Field gradient(const Field& f);
Field divergence(const Field& u);
// max_k |xi . u^(k)| / max_k |u^(k)|
double divergence_defect(const Field& u);

// periodic convolution times h^n; theta is centred on the origin grid point
Field convolve(const Field& theta, const Field& f);

struct RescaleInfo {
  bool wraps = false;  // some lambda*x fell outside the cube and used a periodic image
};
// lambda f(lambda x) by separable trigonometric interpolation
Field rescale(const Field& f, double lambda, RescaleInfo* info = nullptr);

// 2/3-rule truncation |k_a| <= (N-1)/3 on every axis
int dealias_cutoff(const Grid& g);
void dealias_inplace(const Grid& g, Spectrum& s);
Field dealias(const Field& f);
// T(Tf * Tg) for scalar fields
Field dealiased_product(const Field& f, const Field& g);

}  // namespace bhk
