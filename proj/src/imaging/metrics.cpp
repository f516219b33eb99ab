#include "imaging/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "common/error.hpp"

namespace secor::img {

double psnr(const Image& a, const Image& b) {
    if (a.height != b.height || a.width != b.width)
        throw ContractError("psnr: shape mismatch");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const std::vector<double>& gaussian_kernel() {
    static const std::vector<double> k = [] {
        std::vector<double> v(kWin);
        const int r = kWin / 2;
        double s = 0.0;
        for (int i = 0; i < kWin; ++i) {
            const double d = i - r;
            v[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            s += v[i];
        }
        for (auto& x : v) x /= s;
        return v;
    }();
    return k;
}

// Separable valid-mode Gaussian filter of one plane.
std::vector<double> blur_valid(const std::vector<double>& p, int H, int W, int& Hv, int& Wv) {
    const auto& k = gaussian_kernel();
    Wv = W - kWin + 1;
    Hv = H - kWin + 1;
    std::vector<double> tmp(static_cast<std::size_t>(H) * Wv);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < Wv; ++x) {
            double acc = 0.0;
            for (int i = 0; i < kWin; ++i) acc += k[i] * p[static_cast<std::size_t>(y) * W + x + i];
            tmp[static_cast<std::size_t>(y) * Wv + x] = acc;
        }
    std::vector<double> out(static_cast<std::size_t>(Hv) * Wv);
    for (int y = 0; y < Hv; ++y)
        for (int x = 0; x < Wv; ++x) {
            double acc = 0.0;
            for (int i = 0; i < kWin; ++i) acc += k[i] * tmp[static_cast<std::size_t>(y + i) * Wv + x];
            out[static_cast<std::size_t>(y) * Wv + x] = acc;
        }
    return out;
}

} // namespace

double ssim(const Image& a, const Image& b) {
    if (a.height != b.height || a.width != b.width)
        throw ContractError("ssim: shape mismatch");
    if (a.height < kWin || a.width < kWin)
        throw ContractError("ssim: image smaller than the 11x11 window");

    const int H = a.height, W = a.width;
    const std::size_t plane = a.plane();
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> pa(a.data.begin() + c * plane, a.data.begin() + (c + 1) * plane);
        std::vector<double> pb(b.data.begin() + c * plane, b.data.begin() + (c + 1) * plane);
        std::vector<double> paa(plane), pbb(plane), pab(plane);
        for (std::size_t i = 0; i < plane; ++i) {
            paa[i] = pa[i] * pa[i];
            pbb[i] = pb[i] * pb[i];
            pab[i] = pa[i] * pb[i];
        }
        int Hv = 0, Wv = 0;
        const auto mu_a = blur_valid(pa, H, W, Hv, Wv);
        const auto mu_b = blur_valid(pb, H, W, Hv, Wv);
        const auto m_aa = blur_valid(paa, H, W, Hv, Wv);
        const auto m_bb = blur_valid(pbb, H, W, Hv, Wv);
        const auto m_ab = blur_valid(pab, H, W, Hv, Wv);

        double acc = 0.0;
        const std::size_t n = mu_a.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double ma = mu_a[i], mb = mu_b[i];
            const double va = m_aa[i] - ma * ma;
            const double vb = m_bb[i] - mb * mb;
            const double cov = m_ab[i] - ma * mb;
            acc += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
                   ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
        }
        total += acc / static_cast<double>(n);
    }
    return total / 3.0;
}

QualityReport quality(const Image& a, const Image& b) {
    return QualityReport{psnr(a, b), ssim(a, b)};
}

} // namespace secor::img
