#pragma once

#include <complex>
#include <vector>

#include "core/autograd.hpp"

namespace secor::core {

// In-place 1D DFT, sign = -1 forward / +1 inverse convention, no scaling.
void fft_inplace(std::vector<std::complex<double>>& a, int sign);

// Complex planes packed as {2,C,H,W} (plane 0 real, plane 1 imaginary).
// forward: unnormalized, sign -1. inverse: sign +1 scaled by 1/(H*W).
Var fft2(const Var& z, bool inverse);

Var pack_complex(const Var& re, const Var& im); // -> {2,C,H,W}
Var real_part(const Var& z);                    // {2,C,H,W} -> {C,H,W}
Var imag_part(const Var& z);

} // namespace secor::core
