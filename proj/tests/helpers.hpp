#pragma once

#include <unistd.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "core/ops.hpp"
#include "imaging/image.hpp"

namespace testutil {

namespace fs = std::filesystem;
using secor::core::Rng;
using secor::core::Tensor;
using secor::core::Var;

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("secor_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }
    std::string str() const { return path_.string(); }
    std::string sub(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

inline secor::img::Image make_image(int h, int w,
                                    const std::function<double(int, int, int)>& fn) {
    secor::img::Image im(h, w);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                im.at(c, y, x) = std::min(1.0, std::max(0.0, fn(c, y, x)));
    return im;
}

inline secor::img::Image constant_image(int h, int w, double v) {
    return make_image(h, w, [v](int, int, int) { return v; });
}

// mean luma `level` with a +-spread two-tone pattern, equal across channels
inline secor::img::Image two_tone_image(int h, int w, double level, double spread) {
    return make_image(h, w, [&](int, int y, int x) {
        return level + (((y + x) % 2 == 0) ? spread : -spread);
    });
}

inline secor::img::Image noise_image(int h, int w, double lo, double hi, std::uint64_t seed) {
    Rng rng(seed);
    secor::img::Image im(h, w);
    for (auto& v : im.data) v = rng.uniform(lo, hi);
    return im;
}

inline Tensor random_tensor(std::vector<int> shape, std::uint64_t seed, double lo = -1.0,
                            double hi = 1.0) {
    Rng rng(seed);
    Tensor t(std::move(shape));
    for (auto& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

// Max elementwise relative error between the analytic gradient of f() w.r.t.
// `leaf` and central finite differences. f must rebuild its graph on each
// call, reading the current value of `leaf`.
inline double fd_check(const std::function<Var()>& f, Var leaf, double h = 1e-5) {
    leaf.zero_grad(); // leaves persist across checks; drop stale accumulation
    Var loss = f();
    loss.backward();
    Tensor analytic = leaf.grad();

    double worst = 0.0;
    for (std::size_t i = 0; i < leaf.numel(); ++i) {
        const double orig = leaf.value()[i];
        leaf.value()[i] = orig + h;
        const double up = f().value()[0];
        leaf.value()[i] = orig - h;
        const double dn = f().value()[0];
        leaf.value()[i] = orig;
        const double fd = (up - dn) / (2.0 * h);
        const double err =
            std::fabs(analytic[i] - fd) / std::max({std::fabs(analytic[i]), std::fabs(fd), 1e-6});
        worst = std::max(worst, err);
    }
    return worst;
}

// Scalar loss for gradient checks: fixed random projection of any output.
inline Var random_projection(const Var& out, std::uint64_t seed) {
    return secor::core::sum(secor::core::mul(out, Var(random_tensor(out.shape(), seed))));
}

// ---- independent oracles -------------------------------------------------

inline double psnr_reference(const secor::img::Image& a, const secor::img::Image& b) {
    double mse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

// Direct per-window SSIM with the same constants and valid-window convention.
inline double ssim_reference(const secor::img::Image& a, const secor::img::Image& b) {
    constexpr int win = 11;
    constexpr double sigma = 1.5, c1 = 1e-4, c2 = 9e-4;
    double kernel[win][win];
    double ksum = 0.0;
    for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
            const double dy = i - win / 2, dx = j - win / 2;
            kernel[i][j] = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
            ksum += kernel[i][j];
        }
    for (auto& row : kernel)
        for (auto& v : row) v /= ksum;

    const int H = a.height, W = a.width;
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        int count = 0;
        for (int y = 0; y + win <= H; ++y)
            for (int x = 0; x + win <= W; ++x) {
                double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
                for (int i = 0; i < win; ++i)
                    for (int j = 0; j < win; ++j) {
                        const double va = a.at(c, y + i, x + j);
                        const double vb = b.at(c, y + i, x + j);
                        const double k = kernel[i][j];
                        ma += k * va;
                        mb += k * vb;
                        saa += k * va * va;
                        sbb += k * vb * vb;
                        sab += k * va * vb;
                    }
                const double va = saa - ma * ma;
                const double vb = sbb - mb * mb;
                const double cov = sab - ma * mb;
                acc += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                       ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++count;
            }
        total += acc / count;
    }
    return total / 3.0;
}

// O(n^2) DFT of one channel plane, forward sign convention.
inline void dft2_reference(const std::vector<double>& re_in, int H, int W,
                           std::vector<double>& re_out, std::vector<double>& im_out) {
    re_out.assign(re_in.size(), 0.0);
    im_out.assign(re_in.size(), 0.0);
    constexpr double tau = 6.283185307179586476925286766559;
    for (int ky = 0; ky < H; ++ky)
        for (int kx = 0; kx < W; ++kx) {
            std::complex<double> acc(0.0, 0.0);
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    const double ang = -tau * (static_cast<double>(ky) * y / H +
                                               static_cast<double>(kx) * x / W);
                    acc += re_in[static_cast<std::size_t>(y) * W + x] *
                           std::complex<double>(std::cos(ang), std::sin(ang));
                }
            re_out[static_cast<std::size_t>(ky) * W + kx] = acc.real();
            im_out[static_cast<std::size_t>(ky) * W + kx] = acc.imag();
        }
}

// Plain recurrence unroll, kept deliberately simple and separate from the
// production scan.
inline std::vector<double> scan_reference(const std::vector<double>& x,
                                          const std::vector<double>& dt,
                                          const std::vector<double>& B,
                                          const std::vector<double>& C,
                                          const std::vector<double>& A,
                                          const std::vector<double>& D, int L, int Ch, int N) {
    std::vector<double> y(static_cast<std::size_t>(L) * Ch, 0.0);
    std::vector<double> h(static_cast<std::size_t>(Ch) * N, 0.0);
    for (int t = 0; t < L; ++t) {
        for (int c = 0; c < Ch; ++c) {
            const double dtv = dt[static_cast<std::size_t>(t) * Ch + c];
            const double xv = x[static_cast<std::size_t>(t) * Ch + c];
            double acc = 0.0;
            for (int n = 0; n < N; ++n) {
                const double a = std::exp(dtv * A[static_cast<std::size_t>(c) * N + n]);
                double& hv = h[static_cast<std::size_t>(c) * N + n];
                hv = a * hv + dtv * B[static_cast<std::size_t>(t) * N + n] * xv;
                acc += C[static_cast<std::size_t>(t) * N + n] * hv;
            }
            y[static_cast<std::size_t>(t) * Ch + c] = acc + D[static_cast<std::size_t>(c)] * xv;
        }
    }
    return y;
}

} // namespace testutil
