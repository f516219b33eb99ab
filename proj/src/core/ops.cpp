#include "core/ops.hpp"

#include <algorithm>
#include <cmath>

namespace secor::core {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
} // namespace

Var constant(Tensor t) { return Var(std::move(t), false); }
Var constant(double v) { return Var(Tensor::scalar(v), false); }

Var add(const Var& a, const Var& b) {
    check_shape(a.value(), b.value(), "add");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b.value()[i];
    return make_op(std::move(out), {a, b}, [a, b](Node& n) {
        add_grad(a, n.grad);
        add_grad(b, n.grad);
    });
}

Var sub(const Var& a, const Var& b) {
    check_shape(a.value(), b.value(), "sub");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b.value()[i];
    return make_op(std::move(out), {a, b}, [a, b](Node& n) {
        add_grad(a, n.grad);
        if (b.requires_grad()) {
            Tensor& g = b.node()->ensure_grad();
            for (std::size_t i = 0; i < g.numel(); ++i) g[i] -= n.grad[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    check_shape(a.value(), b.value(), "mul");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b.value()[i];
    return make_op(std::move(out), {a, b}, [a, b](Node& n) {
        if (a.requires_grad()) {
            Tensor& g = a.node()->ensure_grad();
            for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * b.value()[i];
        }
        if (b.requires_grad()) {
            Tensor& g = b.node()->ensure_grad();
            for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * a.value()[i];
        }
    });
}

Var div(const Var& a, const Var& b) {
    check_shape(a.value(), b.value(), "div");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] /= b.value()[i];
    return make_op(std::move(out), {a, b}, [a, b](Node& n) {
        if (a.requires_grad()) {
            Tensor& g = a.node()->ensure_grad();
            for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] / b.value()[i];
        }
        if (b.requires_grad()) {
            Tensor& g = b.node()->ensure_grad();
            for (std::size_t i = 0; i < g.numel(); ++i) {
                const double bv = b.value()[i];
                g[i] -= n.grad[i] * a.value()[i] / (bv * bv);
            }
        }
    });
}

Var add_c(const Var& a, double c) {
    Tensor out = a.value();
    for (auto& v : out.data) v += c;
    return make_op(std::move(out), {a}, [a](Node& n) { add_grad(a, n.grad); });
}

Var mul_c(const Var& a, double c) {
    Tensor out = a.value();
    for (auto& v : out.data) v *= c;
    return make_op(std::move(out), {a}, [a, c](Node& n) {
        if (!a.requires_grad()) return;
        Tensor& g = a.node()->ensure_grad();
        for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * c;
    });
}

Var pow_c(const Var& a, double p) {
    Tensor out = a.value();
    for (auto& v : out.data) v = std::pow(v, p);
    return make_op(std::move(out), {a, }, [a, p](Node& n) {
        if (!a.requires_grad()) return;
        Tensor& g = a.node()->ensure_grad();
        for (std::size_t i = 0; i < g.numel(); ++i)
            g[i] += n.grad[i] * p * std::pow(a.value()[i], p - 1.0);
    });
}

Var bmul(const Var& a, const Var& s) {
    if (s.numel() != 1) throw ContractError("bmul: broadcast operand must have one element");
    const double sv = s.value()[0];
    Tensor out = a.value();
    for (auto& v : out.data) v *= sv;
    return make_op(std::move(out), {a, s}, [a, s, sv](Node& n) {
        if (a.requires_grad()) {
            Tensor& g = a.node()->ensure_grad();
            for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * sv;
        }
        if (s.requires_grad()) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n.grad.numel(); ++i) acc += n.grad[i] * a.value()[i];
            s.node()->ensure_grad()[0] += acc;
        }
    });
}

Var badd(const Var& a, const Var& s) {
    if (s.numel() != 1) throw ContractError("badd: broadcast operand must have one element");
    const double sv = s.value()[0];
    Tensor out = a.value();
    for (auto& v : out.data) v += sv;
    return make_op(std::move(out), {a, s}, [a, s](Node& n) {
        add_grad(a, n.grad);
        if (s.requires_grad()) {
            double acc = 0.0;
            for (double gv : n.grad.data) acc += gv;
            s.node()->ensure_grad()[0] += acc;
        }
    });
}

Var bdiv(const Var& a, const Var& s) {
    if (s.numel() != 1) throw ContractError("bdiv: broadcast operand must have one element");
    const double sv = s.value()[0];
    Tensor out = a.value();
    for (auto& v : out.data) v /= sv;
    return make_op(std::move(out), {a, s}, [a, s, sv](Node& n) {
        if (a.requires_grad()) {
            Tensor& g = a.node()->ensure_grad();
            for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] / sv;
        }
        if (s.requires_grad()) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n.grad.numel(); ++i) acc += n.grad[i] * a.value()[i];
            s.node()->ensure_grad()[0] -= acc / (sv * sv);
        }
    });
}

Var neg(const Var& a) { return mul_c(a, -1.0); }

Var exp_v(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v = std::exp(v);
    return make_op(std::move(out), {a}, [a](Node& n) {
        if (!a.requires_grad()) return;
        Tensor& g = a.node()->ensure_grad();
        for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * n.value[i];
    });
}

Var log_v(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v = std::log(v);
    return make_op(std::move(out), {a}, [a](Node& n) {
        if (!a.requires_grad()) return;
        Tensor& g = a.node()->ensure_grad();
        for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] / a.value()[i];
    });
}

Var sqrt_v(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v = std::sqrt(v);
    return make_op(std::move(out), {a}, [a](Node& n) {
        if (!a.requires_grad()) return;
        Tensor& g = a.node()->ensure_grad();
        for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * 0.5 / n.value[i];
    });
}

Var abs_v(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v = std::fabs(v);
    return make_op(std::move(out), {a}, [a](Node& n) {
        if (!a.requires_grad()) return;
        Tensor& g = a.node()->ensure_grad();
        for (std::size_t i = 0; i < g.numel(); ++i) {
            const double x = a.value()[i];
            g[i] += n.grad[i] * (x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0));
        }
    });
}

Var square(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v *= v;
    return make_op(std::move(out), {a}, [a](Node& n) {
        if (!a.requires_grad()) return;
        Tensor& g = a.node()->ensure_grad();
        for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * 2.0 * a.value()[i];
    });
}

namespace {
inline double sigmoid_s(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}
} // namespace

Var sigmoid(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v = sigmoid_s(v);
    return make_op(std::move(out), {a}, [a](Node& n) {
        if (!a.requires_grad()) return;
        Tensor& g = a.node()->ensure_grad();
        for (std::size_t i = 0; i < g.numel(); ++i) {
            const double s = n.value[i];
            g[i] += n.grad[i] * s * (1.0 - s);
        }
    });
}

Var softplus(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v = v > 30.0 ? v : std::log1p(std::exp(v));
    return make_op(std::move(out), {a}, [a](Node& n) {
        if (!a.requires_grad()) return;
        Tensor& g = a.node()->ensure_grad();
        for (std::size_t i = 0; i < g.numel(); ++i)
            g[i] += n.grad[i] * sigmoid_s(a.value()[i]);
    });
}

Var gelu(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
    return make_op(std::move(out), {a}, [a](Node& n) {
        if (!a.requires_grad()) return;
        Tensor& g = a.node()->ensure_grad();
        for (std::size_t i = 0; i < g.numel(); ++i) {
            const double x = a.value()[i];
            const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
            const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
            g[i] += n.grad[i] * (cdf + x * pdf);
        }
    });
}

Var sin_v(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v = std::sin(v);
    return make_op(std::move(out), {a}, [a](Node& n) {
        if (!a.requires_grad()) return;
        Tensor& g = a.node()->ensure_grad();
        for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * std::cos(a.value()[i]);
    });
}

Var cos_v(const Var& a) {
    Tensor out = a.value();
    for (auto& v : out.data) v = std::cos(v);
    return make_op(std::move(out), {a}, [a](Node& n) {
        if (!a.requires_grad()) return;
        Tensor& g = a.node()->ensure_grad();
        for (std::size_t i = 0; i < g.numel(); ++i) g[i] -= n.grad[i] * std::sin(a.value()[i]);
    });
}

Var atan2_v(const Var& y, const Var& x, double back_eps) {
    check_shape(y.value(), x.value(), "atan2");
    Tensor out = y.value();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::atan2(y.value()[i], x.value()[i]);
    return make_op(std::move(out), {y, x}, [y, x, back_eps](Node& n) {
        for (std::size_t i = 0; i < n.grad.numel(); ++i) {
            const double yv = y.value()[i];
            const double xv = x.value()[i];
            const double r2 = xv * xv + yv * yv + back_eps;
            if (y.requires_grad()) y.node()->ensure_grad()[i] += n.grad[i] * xv / r2;
            if (x.requires_grad()) x.node()->ensure_grad()[i] -= n.grad[i] * yv / r2;
        }
    });
}

Var clamp01(const Var& a) {
    Tensor out = a.value();
    // explicit comparisons so NaN propagates instead of silently clamping
    for (auto& v : out.data) v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return make_op(std::move(out), {a}, [a](Node& n) {
        if (!a.requires_grad()) return;
        Tensor& g = a.node()->ensure_grad();
        for (std::size_t i = 0; i < g.numel(); ++i) {
            const double x = a.value()[i];
            if (x >= 0.0 && x <= 1.0) g[i] += n.grad[i];
        }
    });
}

Var sum(const Var& a) {
    double acc = 0.0;
    for (double v : a.value().data) acc += v;
    return make_op(Tensor::scalar(acc), {a}, [a](Node& n) {
        if (!a.requires_grad()) return;
        Tensor& g = a.node()->ensure_grad();
        const double gv = n.grad[0];
        for (auto& v : g.data) v += gv;
    });
}

Var mean(const Var& a) {
    const double inv = 1.0 / static_cast<double>(a.numel());
    double acc = 0.0;
    for (double v : a.value().data) acc += v;
    acc *= inv;
    return make_op(Tensor::scalar(acc), {a}, [a, inv](Node& n) {
        if (!a.requires_grad()) return;
        Tensor& g = a.node()->ensure_grad();
        const double gv = n.grad[0] * inv;
        for (auto& v : g.data) v += gv;
    });
}

Var matmul(const Var& a, const Var& b) {
    const auto& as = a.shape();
    const auto& bs = b.shape();
    if (as.size() != 2 || bs.size() != 2 || as[1] != bs[0])
        throw ContractError("matmul: incompatible shapes " + a.value().shape_str() + " x " + b.value().shape_str());
    const int m = as[0], k = as[1], n2 = bs[1];
    Tensor out({m, n2});
    for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
            const double av = a.value()[static_cast<std::size_t>(i) * k + p];
            if (av == 0.0) continue;
            for (int j = 0; j < n2; ++j)
                out[static_cast<std::size_t>(i) * n2 + j] += av * b.value()[static_cast<std::size_t>(p) * n2 + j];
        }
    return make_op(std::move(out), {a, b}, [a, b, m, k, n2](Node& n) {
        if (a.requires_grad()) {
            Tensor& g = a.node()->ensure_grad();
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n2; ++j) {
                    const double gv = n.grad[static_cast<std::size_t>(i) * n2 + j];
                    if (gv == 0.0) continue;
                    for (int p = 0; p < k; ++p)
                        g[static_cast<std::size_t>(i) * k + p] += gv * b.value()[static_cast<std::size_t>(p) * n2 + j];
                }
        }
        if (b.requires_grad()) {
            Tensor& g = b.node()->ensure_grad();
            for (int i = 0; i < m; ++i)
                for (int p = 0; p < k; ++p) {
                    const double av = a.value()[static_cast<std::size_t>(i) * k + p];
                    if (av == 0.0) continue;
                    for (int j = 0; j < n2; ++j)
                        g[static_cast<std::size_t>(p) * n2 + j] += av * n.grad[static_cast<std::size_t>(i) * n2 + j];
                }
        }
    });
}

Var add_rowvec(const Var& a, const Var& b) {
    const auto& as = a.shape();
    if (as.size() != 2 || b.numel() != static_cast<std::size_t>(as[1]))
        throw ContractError("add_rowvec: expected {m,k} + {k}");
    const int m = as[0], k = as[1];
    Tensor out = a.value();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) out[static_cast<std::size_t>(i) * k + j] += b.value()[j];
    return make_op(std::move(out), {a, b}, [a, b, m, k](Node& n) {
        add_grad(a, n.grad);
        if (b.requires_grad()) {
            Tensor& g = b.node()->ensure_grad();
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < k; ++j) g[j] += n.grad[static_cast<std::size_t>(i) * k + j];
        }
    });
}

Var reshape(const Var& a, std::vector<int> shape) {
    if (Tensor::count(shape) != a.numel()) throw ContractError("reshape: element count mismatch");
    Tensor out = a.value();
    out.shape = std::move(shape);
    return make_op(std::move(out), {a}, [a](Node& n) { add_grad(a, n.grad); });
}

Var stack_scalars(const std::vector<Var>& xs) {
    Tensor out({static_cast<int>(xs.size())});
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i].numel() != 1) throw ContractError("stack_scalars: all inputs must be scalars");
        out[i] = xs[i].value()[0];
    }
    std::vector<Var> parents = xs;
    return make_op(std::move(out), parents, [parents](Node& n) {
        for (std::size_t i = 0; i < parents.size(); ++i)
            if (parents[i].requires_grad()) parents[i].node()->ensure_grad()[0] += n.grad[i];
    });
}

Var concat0(const std::vector<Var>& xs) {
    if (xs.empty()) throw ContractError("concat0: empty input list");
    std::vector<int> shape = xs[0].shape();
    std::size_t trailing = 1;
    for (std::size_t i = 1; i < shape.size(); ++i) trailing *= static_cast<std::size_t>(shape[i]);
    int total0 = 0;
    for (const auto& x : xs) {
        const auto& s = x.shape();
        if (s.size() != shape.size()) throw ContractError("concat0: rank mismatch");
        for (std::size_t i = 1; i < s.size(); ++i)
            if (s[i] != shape[i]) throw ContractError("concat0: trailing dims mismatch");
        total0 += s[0];
    }
    shape[0] = total0;
    Tensor out(shape);
    std::size_t off = 0;
    for (const auto& x : xs) {
        std::copy(x.value().data.begin(), x.value().data.end(), out.data.begin() + off);
        off += x.numel();
    }
    std::vector<Var> parents = xs;
    return make_op(std::move(out), parents, [parents](Node& n) {
        std::size_t off2 = 0;
        for (const auto& p : parents) {
            if (p.requires_grad()) {
                Tensor& g = p.node()->ensure_grad();
                for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[off2 + i];
            }
            off2 += p.numel();
        }
    });
}

Var narrow0(const Var& a, int start, int len) {
    const auto& s = a.shape();
    if (s.empty() || start < 0 || len < 0 || start + len > s[0])
        throw ContractError("narrow0: slice out of range");
    std::size_t trailing = 1;
    for (std::size_t i = 1; i < s.size(); ++i) trailing *= static_cast<std::size_t>(s[i]);
    std::vector<int> shape = s;
    shape[0] = len;
    Tensor out(shape);
    const std::size_t off = static_cast<std::size_t>(start) * trailing;
    std::copy(a.value().data.begin() + off, a.value().data.begin() + off + out.numel(), out.data.begin());
    return make_op(std::move(out), {a}, [a, off](Node& n) {
        if (!a.requires_grad()) return;
        Tensor& g = a.node()->ensure_grad();
        for (std::size_t i = 0; i < n.grad.numel(); ++i) g[off + i] += n.grad[i];
    });
}

Var channel_mean(const Var& x) {
    const auto& s = x.shape();
    if (s.size() != 3) throw ContractError("channel_mean: expected {C,H,W}");
    const int C = s[0], H = s[1], W = s[2];
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    Tensor out({1, H, W});
    const double inv = 1.0 / C;
    for (std::size_t i = 0; i < plane; ++i) {
        double acc = 0.0;
        for (int c = 0; c < C; ++c) acc += x.value()[c * plane + i];
        out[i] = acc * inv;
    }
    return make_op(std::move(out), {x}, [x, C, plane, inv](Node& n) {
        if (!x.requires_grad()) return;
        Tensor& g = x.node()->ensure_grad();
        for (std::size_t i = 0; i < plane; ++i) {
            const double gv = n.grad[i] * inv;
            for (int c = 0; c < C; ++c) g[c * plane + i] += gv;
        }
    });
}

Var channel_max(const Var& x) {
    const auto& s = x.shape();
    if (s.size() != 3) throw ContractError("channel_max: expected {C,H,W}");
    const int C = s[0], H = s[1], W = s[2];
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    Tensor out({1, H, W});
    std::vector<int> arg(plane, 0);
    for (std::size_t i = 0; i < plane; ++i) {
        double best = x.value()[i];
        int bc = 0;
        for (int c = 1; c < C; ++c) {
            const double v = x.value()[c * plane + i];
            if (v > best) { best = v; bc = c; }
        }
        out[i] = best;
        arg[i] = bc;
    }
    return make_op(std::move(out), {x}, [x, plane, arg = std::move(arg)](Node& n) {
        if (!x.requires_grad()) return;
        Tensor& g = x.node()->ensure_grad();
        for (std::size_t i = 0; i < plane; ++i)
            g[static_cast<std::size_t>(arg[i]) * plane + i] += n.grad[i];
    });
}

Var broadcast_mul_ch(const Var& x, const Var& gate) {
    const auto& s = x.shape();
    const auto& gs = gate.shape();
    if (s.size() != 3 || gs.size() != 3 || gs[0] != 1 || gs[1] != s[1] || gs[2] != s[2])
        throw ContractError("broadcast_mul_ch: gate must be {1,H,W} matching x");
    const int C = s[0];
    const std::size_t plane = static_cast<std::size_t>(s[1]) * s[2];
    Tensor out = x.value();
    for (int c = 0; c < C; ++c)
        for (std::size_t i = 0; i < plane; ++i) out[c * plane + i] *= gate.value()[i];
    return make_op(std::move(out), {x, gate}, [x, gate, C, plane](Node& n) {
        if (x.requires_grad()) {
            Tensor& g = x.node()->ensure_grad();
            for (int c = 0; c < C; ++c)
                for (std::size_t i = 0; i < plane; ++i)
                    g[c * plane + i] += n.grad[c * plane + i] * gate.value()[i];
        }
        if (gate.requires_grad()) {
            Tensor& g = gate.node()->ensure_grad();
            for (int c = 0; c < C; ++c)
                for (std::size_t i = 0; i < plane; ++i)
                    g[i] += n.grad[c * plane + i] * x.value()[c * plane + i];
        }
    });
}

Var layer_norm_ch(const Var& x, const Var& gamma, const Var& beta, double eps) {
    const auto& s = x.shape();
    if (s.size() != 3) throw ContractError("layer_norm_ch: expected {C,H,W}");
    const int C = s[0];
    if (gamma.numel() != static_cast<std::size_t>(C) || beta.numel() != static_cast<std::size_t>(C))
        throw ContractError("layer_norm_ch: affine params must have C elements");
    const std::size_t plane = static_cast<std::size_t>(s[1]) * s[2];

    Tensor out(s);
    Tensor xhat(s);
    std::vector<double> inv_sigma(plane);
    const double invC = 1.0 / C;
    for (std::size_t i = 0; i < plane; ++i) {
        double m = 0.0;
        for (int c = 0; c < C; ++c) m += x.value()[c * plane + i];
        m *= invC;
        double var = 0.0;
        for (int c = 0; c < C; ++c) {
            const double d = x.value()[c * plane + i] - m;
            var += d * d;
        }
        var *= invC;
        const double is = 1.0 / std::sqrt(var + eps);
        inv_sigma[i] = is;
        for (int c = 0; c < C; ++c) {
            const double xh = (x.value()[c * plane + i] - m) * is;
            xhat[c * plane + i] = xh;
            out[c * plane + i] = xh * gamma.value()[c] + beta.value()[c];
        }
    }
    return make_op(std::move(out), {x, gamma, beta},
                   [x, gamma, beta, C, plane, invC, xhat = std::move(xhat),
                    inv_sigma = std::move(inv_sigma)](Node& n) {
        for (std::size_t i = 0; i < plane; ++i) {
            // dy scaled by gamma, then the standard layer-norm backward.
            double sum_dxh = 0.0, sum_dxh_xh = 0.0;
            for (int c = 0; c < C; ++c) {
                const double dy = n.grad[c * plane + i];
                const double dxh = dy * gamma.value()[c];
                sum_dxh += dxh;
                sum_dxh_xh += dxh * xhat[c * plane + i];
            }
            if (x.requires_grad()) {
                Tensor& g = x.node()->ensure_grad();
                for (int c = 0; c < C; ++c) {
                    const double dxh = n.grad[c * plane + i] * gamma.value()[c];
                    g[c * plane + i] += inv_sigma[i] *
                        (dxh - invC * sum_dxh - xhat[c * plane + i] * invC * sum_dxh_xh);
                }
            }
        }
        if (gamma.requires_grad()) {
            Tensor& g = gamma.node()->ensure_grad();
            for (int c = 0; c < C; ++c) {
                double acc = 0.0;
                for (std::size_t i = 0; i < plane; ++i)
                    acc += n.grad[c * plane + i] * xhat[c * plane + i];
                g[c] += acc;
            }
        }
        if (beta.requires_grad()) {
            Tensor& g = beta.node()->ensure_grad();
            for (int c = 0; c < C; ++c) {
                double acc = 0.0;
                for (std::size_t i = 0; i < plane; ++i) acc += n.grad[c * plane + i];
                g[c] += acc;
            }
        }
    });
}

Var cosine_sim(const Var& a, const Var& b) {
    if (a.numel() != b.numel()) throw ContractError("cosine_sim: dimension mismatch");
    double na = 0.0, nb = 0.0;
    for (double v : a.value().data) na += v * v;
    for (double v : b.value().data) nb += v * v;
    if (na == 0.0 || nb == 0.0) throw ContractError("cosine_sim: zero vector");
    Var dot = sum(mul(a, b));
    Var den = sqrt_v(bmul(sum(square(a)), sum(square(b))));
    return bdiv(dot, den); // both scalars; bdiv broadcasts trivially
}

double cosine_sim(const Tensor& a, const Tensor& b) {
    if (a.numel() != b.numel()) throw ContractError("cosine_sim: dimension mismatch");
    double na = 0.0, nb = 0.0, d = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        na += a[i] * a[i];
        nb += b[i] * b[i];
        d += a[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw ContractError("cosine_sim: zero vector");
    return d / std::sqrt(na * nb);
}

} // namespace secor::core
