#include "core/conv.hpp"

namespace secor::core {

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
    const auto& xs = x.shape();
    const auto& ws = w.shape();
    if (xs.size() != 3 || ws.size() != 4 || ws[1] != xs[0])
        throw ContractError("conv2d: expected x {Ci,H,W}, w {Co,Ci,kh,kw}");
    const int Ci = xs[0], H = xs[1], W = xs[2];
    const int Co = ws[0], kh = ws[2], kw = ws[3];
    const int Ho = (H + 2 * pad - kh) / stride + 1;
    const int Wo = (W + 2 * pad - kw) / stride + 1;
    if (Ho <= 0 || Wo <= 0) throw ContractError("conv2d: output would be empty");
    if (b.defined() && b.numel() != static_cast<std::size_t>(Co))
        throw ContractError("conv2d: bias must have Co elements");

    Tensor out({Co, Ho, Wo});
    const std::size_t xplane = static_cast<std::size_t>(H) * W;
    const std::size_t oplane = static_cast<std::size_t>(Ho) * Wo;
    for (int co = 0; co < Co; ++co) {
        double* op = out.data.data() + co * oplane;
        if (b.defined()) {
            const double bv = b.value()[co];
            for (std::size_t i = 0; i < oplane; ++i) op[i] = bv;
        }
        for (int ci = 0; ci < Ci; ++ci) {
            const double* xp = x.value().data.data() + ci * xplane;
            const double* wp = w.value().data.data() + ((static_cast<std::size_t>(co) * Ci + ci) * kh) * kw;
            for (int ky = 0; ky < kh; ++ky)
                for (int kx = 0; kx < kw; ++kx) {
                    const double wv = wp[ky * kw + kx];
                    if (wv == 0.0) continue;
                    for (int oy = 0; oy < Ho; ++oy) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= H) continue;
                        double* orow = op + static_cast<std::size_t>(oy) * Wo;
                        const double* xrow = xp + static_cast<std::size_t>(iy) * W;
                        for (int ox = 0; ox < Wo; ++ox) {
                            const int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= W) continue;
                            orow[ox] += wv * xrow[ix];
                        }
                    }
                }
        }
    }

    return make_op(std::move(out), {x, w, b},
                   [x, w, b, Ci, H, W, Co, kh, kw, Ho, Wo, stride, pad, xplane, oplane](Node& n) {
        const bool gx = x.requires_grad();
        const bool gw = w.requires_grad();
        const bool gb = b.defined() && b.requires_grad();
        Tensor* xg = gx ? &x.node()->ensure_grad() : nullptr;
        Tensor* wg = gw ? &w.node()->ensure_grad() : nullptr;
        Tensor* bg = gb ? &b.node()->ensure_grad() : nullptr;
        for (int co = 0; co < Co; ++co) {
            const double* gp = n.grad.data.data() + co * oplane;
            if (bg) {
                double acc = 0.0;
                for (std::size_t i = 0; i < oplane; ++i) acc += gp[i];
                (*bg)[co] += acc;
            }
            if (!gx && !gw) continue;
            for (int ci = 0; ci < Ci; ++ci) {
                const double* xp = x.value().data.data() + ci * xplane;
                const std::size_t wbase = ((static_cast<std::size_t>(co) * Ci + ci) * kh) * kw;
                for (int ky = 0; ky < kh; ++ky)
                    for (int kx = 0; kx < kw; ++kx) {
                        const double wv = w.value()[wbase + ky * kw + kx];
                        double wacc = 0.0;
                        for (int oy = 0; oy < Ho; ++oy) {
                            const int iy = oy * stride + ky - pad;
                            if (iy < 0 || iy >= H) continue;
                            const double* grow = gp + static_cast<std::size_t>(oy) * Wo;
                            const double* xrow = xp + static_cast<std::size_t>(iy) * W;
                            double* xgrow = gx ? xg->data.data() + ci * xplane + static_cast<std::size_t>(iy) * W
                                              : nullptr;
                            for (int ox = 0; ox < Wo; ++ox) {
                                const int ix = ox * stride + kx - pad;
                                if (ix < 0 || ix >= W) continue;
                                const double gv = grow[ox];
                                if (gw) wacc += gv * xrow[ix];
                                if (gx) xgrow[ix] += gv * wv;
                            }
                        }
                        if (gw) (*wg)[wbase + ky * kw + kx] += wacc;
                    }
            }
        }
    });
}

Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride) {
    const auto& xs = x.shape();
    const auto& ws = w.shape();
    if (xs.size() != 3 || ws.size() != 4 || ws[0] != xs[0])
        throw ContractError("conv_transpose2d: expected x {Ci,H,W}, w {Ci,Co,kh,kw}");
    const int Ci = xs[0], H = xs[1], W = xs[2];
    const int Co = ws[1], kh = ws[2], kw = ws[3];
    const int Ho = (H - 1) * stride + kh;
    const int Wo = (W - 1) * stride + kw;
    if (b.defined() && b.numel() != static_cast<std::size_t>(Co))
        throw ContractError("conv_transpose2d: bias must have Co elements");

    Tensor out({Co, Ho, Wo});
    const std::size_t xplane = static_cast<std::size_t>(H) * W;
    const std::size_t oplane = static_cast<std::size_t>(Ho) * Wo;
    if (b.defined())
        for (int co = 0; co < Co; ++co) {
            const double bv = b.value()[co];
            double* op = out.data.data() + co * oplane;
            for (std::size_t i = 0; i < oplane; ++i) op[i] = bv;
        }
    for (int ci = 0; ci < Ci; ++ci) {
        const double* xp = x.value().data.data() + ci * xplane;
        for (int co = 0; co < Co; ++co) {
            double* op = out.data.data() + co * oplane;
            const double* wp = w.value().data.data() + ((static_cast<std::size_t>(ci) * Co + co) * kh) * kw;
            for (int y0 = 0; y0 < H; ++y0)
                for (int x0 = 0; x0 < W; ++x0) {
                    const double xv = xp[static_cast<std::size_t>(y0) * W + x0];
                    if (xv == 0.0) continue;
                    for (int ky = 0; ky < kh; ++ky) {
                        double* orow = op + static_cast<std::size_t>(y0 * stride + ky) * Wo + x0 * stride;
                        const double* wrow = wp + ky * kw;
                        for (int kx = 0; kx < kw; ++kx) orow[kx] += xv * wrow[kx];
                    }
                }
        }
    }

    return make_op(std::move(out), {x, w, b},
                   [x, w, b, Ci, H, W, Co, kh, kw, Wo, stride, xplane, oplane](Node& n) {
        const bool gx = x.requires_grad();
        const bool gw = w.requires_grad();
        if (b.defined() && b.requires_grad()) {
            Tensor& bg = b.node()->ensure_grad();
            for (int co = 0; co < Co; ++co) {
                double acc = 0.0;
                const double* gp = n.grad.data.data() + co * oplane;
                for (std::size_t i = 0; i < oplane; ++i) acc += gp[i];
                bg[co] += acc;
            }
        }
        if (!gx && !gw) return;
        Tensor* xg = gx ? &x.node()->ensure_grad() : nullptr;
        Tensor* wg = gw ? &w.node()->ensure_grad() : nullptr;
        for (int ci = 0; ci < Ci; ++ci) {
            const double* xp = x.value().data.data() + ci * xplane;
            for (int co = 0; co < Co; ++co) {
                const double* gp = n.grad.data.data() + co * oplane;
                const std::size_t wbase = ((static_cast<std::size_t>(ci) * Co + co) * kh) * kw;
                for (int y0 = 0; y0 < H; ++y0)
                    for (int x0 = 0; x0 < W; ++x0) {
                        const double xv = xp[static_cast<std::size_t>(y0) * W + x0];
                        double xacc = 0.0;
                        for (int ky = 0; ky < kh; ++ky) {
                            const double* grow = gp + static_cast<std::size_t>(y0 * stride + ky) * Wo + x0 * stride;
                            for (int kx = 0; kx < kw; ++kx) {
                                if (gx) xacc += grow[kx] * w.value()[wbase + ky * kw + kx];
                                if (gw) (*wg)[wbase + ky * kw + kx] += grow[kx] * xv;
                            }
                        }
                        if (gx) (*xg)[ci * xplane + static_cast<std::size_t>(y0) * W + x0] += xacc;
                    }
            }
        }
    });
}

Var avg_pool2x2(const Var& x) {
    const auto& s = x.shape();
    if (s.size() != 3 || s[1] % 2 || s[2] % 2)
        throw ContractError("avg_pool2x2: expected {C,H,W} with even H,W");
    const int C = s[0], H = s[1], W = s[2];
    const int Ho = H / 2, Wo = W / 2;
    Tensor out({C, Ho, Wo});
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < Ho; ++y)
            for (int xx = 0; xx < Wo; ++xx) {
                const std::size_t base = idx3(c, 2 * y, 2 * xx, H, W);
                out[idx3(c, y, xx, Ho, Wo)] =
                    0.25 * (x.value()[base] + x.value()[base + 1] +
                            x.value()[base + W] + x.value()[base + W + 1]);
            }
    return make_op(std::move(out), {x}, [x, C, H, W, Ho, Wo](Node& n) {
        if (!x.requires_grad()) return;
        Tensor& g = x.node()->ensure_grad();
        for (int c = 0; c < C; ++c)
            for (int y = 0; y < Ho; ++y)
                for (int xx = 0; xx < Wo; ++xx) {
                    const double gv = 0.25 * n.grad[idx3(c, y, xx, Ho, Wo)];
                    const std::size_t base = idx3(c, 2 * y, 2 * xx, H, W);
                    g[base] += gv;
                    g[base + 1] += gv;
                    g[base + W] += gv;
                    g[base + W + 1] += gv;
                }
    });
}

namespace {
inline int reflect_index(int i, int n) {
    // torch-style reflect (no edge repeat); valid while |overhang| < n
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
    return i;
}
} // namespace

Var reflect_pad2(const Var& x, int top, int bottom, int left, int right) {
    const auto& s = x.shape();
    if (s.size() != 3) throw ContractError("reflect_pad2: expected {C,H,W}");
    const int C = s[0], H = s[1], W = s[2];
    if (top >= H || bottom >= H || left >= W || right >= W)
        throw ContractError("reflect_pad2: pad must be smaller than the image");
    const int Ho = H + top + bottom, Wo = W + left + right;
    Tensor out({C, Ho, Wo});
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < Ho; ++y) {
            const int sy = reflect_index(y - top, H);
            for (int xx = 0; xx < Wo; ++xx) {
                const int sx = reflect_index(xx - left, W);
                out[idx3(c, y, xx, Ho, Wo)] = x.value()[idx3(c, sy, sx, H, W)];
            }
        }
    return make_op(std::move(out), {x}, [x, C, H, W, Ho, Wo, top, left](Node& n) {
        if (!x.requires_grad()) return;
        Tensor& g = x.node()->ensure_grad();
        for (int c = 0; c < C; ++c)
            for (int y = 0; y < Ho; ++y) {
                const int sy = reflect_index(y - top, H);
                for (int xx = 0; xx < Wo; ++xx) {
                    const int sx = reflect_index(xx - left, W);
                    g[idx3(c, sy, sx, H, W)] += n.grad[idx3(c, y, xx, Ho, Wo)];
                }
            }
    });
}

Var crop2(const Var& x, int top, int left, int h, int w) {
    const auto& s = x.shape();
    if (s.size() != 3 || top < 0 || left < 0 || top + h > s[1] || left + w > s[2])
        throw ContractError("crop2: window out of range");
    const int C = s[0], H = s[1], W = s[2];
    Tensor out({C, h, w});
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx)
                out[idx3(c, y, xx, h, w)] = x.value()[idx3(c, y + top, xx + left, H, W)];
    return make_op(std::move(out), {x}, [x, C, H, W, h, w, top, left](Node& n) {
        if (!x.requires_grad()) return;
        Tensor& g = x.node()->ensure_grad();
        for (int c = 0; c < C; ++c)
            for (int y = 0; y < h; ++y)
                for (int xx = 0; xx < w; ++xx)
                    g[idx3(c, y + top, xx + left, H, W)] += n.grad[idx3(c, y, xx, h, w)];
    });
}

} // namespace secor::core
