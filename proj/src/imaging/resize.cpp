#include "imaging/resize.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace secor::img {

Image resize_bilinear(const Image& im, int out_h, int out_w) {
    if (out_h <= 0 || out_w <= 0) throw ContractError("resize: output size must be positive");
    if (out_h == im.height && out_w == im.width) return im;

    Image out(out_h, out_w);
    const double sy = static_cast<double>(im.height) / out_h;
    const double sx = static_cast<double>(im.width) / out_w;
    for (int y = 0; y < out_h; ++y) {
        const double fy = std::max(0.0, (y + 0.5) * sy - 0.5);
        const int y0 = std::min(im.height - 1, static_cast<int>(fy));
        const int y1 = std::min(im.height - 1, y0 + 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            const double fx = std::max(0.0, (x + 0.5) * sx - 0.5);
            const int x0 = std::min(im.width - 1, static_cast<int>(fx));
            const int x1 = std::min(im.width - 1, x0 + 1);
            const double wx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                const double top = im.at(c, y0, x0) * (1.0 - wx) + im.at(c, y0, x1) * wx;
                const double bot = im.at(c, y1, x0) * (1.0 - wx) + im.at(c, y1, x1) * wx;
                out.at(c, y, x) = top * (1.0 - wy) + bot * wy;
            }
        }
    }
    return out;
}

Image flip_h(const Image& im) {
    Image out(im.height, im.width);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < im.height; ++y)
            for (int x = 0; x < im.width; ++x)
                out.at(c, y, x) = im.at(c, y, im.width - 1 - x);
    return out;
}

Image flip_v(const Image& im) {
    Image out(im.height, im.width);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < im.height; ++y)
            for (int x = 0; x < im.width; ++x)
                out.at(c, y, x) = im.at(c, im.height - 1 - y, x);
    return out;
}

Image resize_and_augment(const Image& im, int size, bool hflip_enabled, bool vflip_enabled,
                         std::uint64_t seed) {
    if (size <= 0) throw ContractError("resize_and_augment: size must be positive");
    Image out = resize_bilinear(im, size, size);
    core::Rng rng(seed);
    const bool do_h = rng.bernoulli();
    const bool do_v = rng.bernoulli();
    if (hflip_enabled && do_h) out = flip_h(out);
    if (vflip_enabled && do_v) out = flip_v(out);
    return out;
}

} // namespace secor::img
