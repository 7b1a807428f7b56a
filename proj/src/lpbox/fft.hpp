#pragma once
#include <complex>

#include "grid.hpp"

namespace lpb {

//==============================================================================
// Thin in-place c2c FFT layer with cached plans per (n, N).
//  - forward(): samples -> Fourier coefficients, scaled by 1/N^n, so that
//      u(x_j) = sum_k  hat(k) * exp(+i (2pi/L) k . x_j).
//  - inverse(): coefficients -> samples (unnormalized synthesis).
// Plans are created with FFTW_ESTIMATE | FFTW_UNALIGNED: estimate keeps plan
// creation independent of runtime timing (bit-reproducible output across runs),
// unaligned lets plans run on any std::vector buffer.
//==============================================================================
namespace fft {

void forward(const Grid& g, std::complex<double>* data);
void inverse(const Grid& g, std::complex<double>* data);

// worker threads for plan execution (clamped to hardware); 1 by default
void set_threads(int k);

} // namespace fft

} // namespace lpb
