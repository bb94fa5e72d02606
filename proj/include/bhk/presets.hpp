#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "bhk/field.hpp"

namespace bhk {

using PresetParams = std::map<std::string, double>;

// power(a, core), gaussian(sigma), annulus_indicator(k), rotational, strictness_witness(p, m, radius),
// random_bandlimited(j, seed, components), pure_block(j, components, amplitude),
// vortex_pair(d, sigma, gamma), bump(radius, cx, cy, cz), heat_kernel(t), delta
Field preset_field(const std::string& name, const PresetParams& params, const Grid& g);
std::vector<std::string> preset_names();

// average of |x|^{-a} over the cube [-h/2,h/2]^n
double power_cell_average(int n, double a, double h);

// lattice frequency inside the pure band (4/3, 3/2) 2^j nearest its centre
std::array<double, 3> pure_block_frequency(const Grid& g, int j);

}  // namespace bhk
