#pragma once

#include <cstdint>

#include "imaging/image.hpp"

namespace secor::img {

// Bilinear, half-pixel centers, no antialias prefilter.
Image resize_bilinear(const Image& im, int out_h, int out_w);

Image flip_h(const Image& im);
Image flip_v(const Image& im);

// Resize to size x size, then apply horizontal/vertical flips. Each enabled
// axis flips according to a boolean drawn from the seeded generator, so a
// given (enable flags, seed) pair is a deterministic involution.
Image resize_and_augment(const Image& im, int size, bool hflip_enabled, bool vflip_enabled,
                         std::uint64_t seed);

} // namespace secor::img
