#pragma once

#include "flagwave/grid.hpp"

namespace flagwave {

// The discrete sums behind convolve and translate_sum, evaluated per pair of z-columns through a
// zero-padded DFT along t. The z-interpolation, the shear and the linear t-interpolation are the
// same as in the direct sums, so results agree to rounding; the cost no longer grows with the
// t-support of the operands, which is what the flag transforms need (long t-axes, fine h_t).
// All operands and the output share one grid.
SampledFunction convolve_spectral(const SampledFunction& f, const SampledFunction& g);
SampledFunction translate_sum_spectral(const SampledFunction& W, const SampledFunction& g);
// partial_convolve_t through one FFT per column; agrees with it to rounding.
SampledFunction partial_convolve_t_spectral(const SampledFunction& f, const Sampled1DFunction& w);

}  // namespace flagwave
