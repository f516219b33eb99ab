#include "core/fft.hpp"

#include <cmath>

namespace secor::core {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

void fft_pow2(std::vector<std::complex<double>>& a, int sign) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * kTau / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Bluestein's algorithm: arbitrary-length DFT via a power-of-two convolution.
void fft_bluestein(std::vector<std::complex<double>>& a, int sign) {
    const std::size_t n = a.size();
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    std::vector<std::complex<double>> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the angle argument small for large n
        const std::size_t k2 = (k * k) % (2 * n);
        const double ang = sign * kTau * static_cast<double>(k2) / (2.0 * static_cast<double>(n));
        chirp[k] = {std::cos(ang), std::sin(ang)};
    }

    std::vector<std::complex<double>> fa(m), fb(m);
    for (std::size_t k = 0; k < n; ++k) fa[k] = a[k] * chirp[k];
    fb[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) fb[k] = fb[m - k] = std::conj(chirp[k]);

    fft_pow2(fa, -1);
    fft_pow2(fb, -1);
    for (std::size_t i = 0; i < m; ++i) fa[i] *= fb[i];
    fft_pow2(fa, +1);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = fa[k] * inv_m * chirp[k];
}

// Applies the raw 2D transform to packed {2,C,H,W} data. No normalization.
Tensor apply_fft2(const Tensor& z, int sign, double scale) {
    const int C = z.dim(1), H = z.dim(2), W = z.dim(3);
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    Tensor out = z;
    std::vector<std::complex<double>> row(W), col(H);
    for (int c = 0; c < C; ++c) {
        double* re = out.data.data() + c * plane;
        double* im = out.data.data() + (static_cast<std::size_t>(C) + c) * plane;
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) row[x] = {re[y * W + x], im[y * W + x]};
            fft_inplace(row, sign);
            for (int x = 0; x < W; ++x) {
                re[y * W + x] = row[x].real();
                im[y * W + x] = row[x].imag();
            }
        }
        for (int x = 0; x < W; ++x) {
            for (int y = 0; y < H; ++y) col[y] = {re[y * W + x], im[y * W + x]};
            fft_inplace(col, sign);
            for (int y = 0; y < H; ++y) {
                re[y * W + x] = col[y].real();
                im[y * W + x] = col[y].imag();
            }
        }
    }
    if (scale != 1.0)
        for (auto& v : out.data) v *= scale;
    return out;
}

} // namespace

void fft_inplace(std::vector<std::complex<double>>& a, int sign) {
    if (a.size() <= 1) return;
    if (is_pow2(a.size()))
        fft_pow2(a, sign);
    else
        fft_bluestein(a, sign);
}

Var fft2(const Var& z, bool inverse) {
    const auto& s = z.shape();
    if (s.size() != 4 || s[0] != 2) throw ContractError("fft2: expected packed {2,C,H,W}");
    const double n = static_cast<double>(s[2]) * s[3];
    Tensor out = inverse ? apply_fft2(z.value(), +1, 1.0 / n) : apply_fft2(z.value(), -1, 1.0);
    // adjoint of the complex-linear map: conjugate transpose, i.e. the
    // opposite-sign transform with matching scale
    return make_op(std::move(out), {z}, [z, inverse, n](Node& nd) {
        if (!z.requires_grad()) return;
        Tensor gz = inverse ? apply_fft2(nd.grad, -1, 1.0 / n) : apply_fft2(nd.grad, +1, 1.0);
        add_grad(z, gz);
    });
}

Var pack_complex(const Var& re, const Var& im) {
    check_shape(re.value(), im.value(), "pack_complex");
    const auto& s = re.shape();
    if (s.size() != 3) throw ContractError("pack_complex: expected {C,H,W} planes");
    Tensor out({2, s[0], s[1], s[2]});
    std::copy(re.value().data.begin(), re.value().data.end(), out.data.begin());
    std::copy(im.value().data.begin(), im.value().data.end(), out.data.begin() + re.numel());
    return make_op(std::move(out), {re, im}, [re, im](Node& n) {
        const std::size_t half = re.numel();
        if (re.requires_grad()) {
            Tensor& g = re.node()->ensure_grad();
            for (std::size_t i = 0; i < half; ++i) g[i] += n.grad[i];
        }
        if (im.requires_grad()) {
            Tensor& g = im.node()->ensure_grad();
            for (std::size_t i = 0; i < half; ++i) g[i] += n.grad[half + i];
        }
    });
}

Var real_part(const Var& z) {
    const auto& s = z.shape();
    if (s.size() != 4 || s[0] != 2) throw ContractError("real_part: expected {2,C,H,W}");
    Tensor out({s[1], s[2], s[3]});
    std::copy(z.value().data.begin(), z.value().data.begin() + out.numel(), out.data.begin());
    return make_op(std::move(out), {z}, [z](Node& n) {
        if (!z.requires_grad()) return;
        Tensor& g = z.node()->ensure_grad();
        for (std::size_t i = 0; i < n.grad.numel(); ++i) g[i] += n.grad[i];
    });
}

Var imag_part(const Var& z) {
    const auto& s = z.shape();
    if (s.size() != 4 || s[0] != 2) throw ContractError("imag_part: expected {2,C,H,W}");
    Tensor out({s[1], s[2], s[3]});
    const std::size_t half = out.numel();
    std::copy(z.value().data.begin() + half, z.value().data.end(), out.data.begin());
    return make_op(std::move(out), {z}, [z, half](Node& n) {
        if (!z.requires_grad()) return;
        Tensor& g = z.node()->ensure_grad();
        for (std::size_t i = 0; i < n.grad.numel(); ++i) g[half + i] += n.grad[i];
    });
}

} // namespace secor::core
