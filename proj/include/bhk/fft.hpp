#pragma once

#include <functional>

#include "bhk/grid.hpp"

namespace bhk {

// unnormalized forward transform of real samples
Spectrum fft_forward(const Grid& g, const double* in);
void fft_forward_inplace(const Grid& g, cplx* data);
// backward transform, divided by N^n, real part written to out; data is clobbered
void fft_inverse_real(const Grid& g, cplx* data, double* out);
std::vector<double> fft_inverse_real(const Grid& g, Spectrum data);

// worker count honoring BHK_THREADS
int thread_count();
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace bhk
