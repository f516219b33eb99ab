#pragma once

#include "imaging/image.hpp"

namespace secor::img {

// 10*log10(1/MSE) with peak 1.0; +infinity for identical inputs.
double psnr(const Image& a, const Image& b);

// Single-scale SSIM, 11x11 Gaussian window sigma 1.5, K1=0.01 K2=0.03,
// dynamic range 1.0. Window means are taken over valid positions only and
// the result is averaged over the three channels. Requires min dim >= 11.
double ssim(const Image& a, const Image& b);

struct QualityReport {
    double psnr_db = 0.0; // +inf sentinel for identical images
    double ssim = 0.0;
};

QualityReport quality(const Image& a, const Image& b);

} // namespace secor::img
