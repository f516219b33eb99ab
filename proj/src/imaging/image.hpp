#pragma once

#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace secor::img {

// sRGB image with planar R,G,B planes and values in [0,1].
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> data; // 3 * height * width

    Image() = default;
    Image(int h, int w) : height(h), width(w), data(3ull * h * w, 0.0) {}

    double& at(int c, int y, int x) { return data[core::idx3(c, y, x, height, width)]; }
    double at(int c, int y, int x) const { return data[core::idx3(c, y, x, height, width)]; }
    std::size_t plane() const { return static_cast<std::size_t>(height) * width; }

    core::Tensor to_tensor() const;
    static Image from_tensor(const core::Tensor& t);

    double mean_luma() const;
    void validate(const char* what) const; // finite, in range, non-empty
};

// 8/16-bit PNG or 8-bit JPEG; values scaled by the file's max code value.
Image load_image(const std::string& path);

// 8-bit PNG, round(v * 255).
void save_image_png(const Image& im, const std::string& path);

// I -> 1 - (1 - I)^gamma; gamma > 1 brightens, gamma < 1 darkens.
Image gamma_transform(const Image& im, double gamma);

bool is_image_file(const std::string& path);

} // namespace secor::img
