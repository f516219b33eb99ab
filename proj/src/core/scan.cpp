#include "core/scan.hpp"

#include <cmath>

namespace secor::core {

Var selective_scan(const Var& x, const Var& dt, const Var& B, const Var& Cc,
                   const Var& A, const Var& D) {
    const auto& xs = x.shape();
    if (xs.size() != 2) throw ContractError("selective_scan: x must be {L,C}");
    const int L = xs[0], C = xs[1];
    check_shape(x.value(), dt.value(), "selective_scan dt");
    const auto& bs = B.shape();
    if (bs.size() != 2 || bs[0] != L) throw ContractError("selective_scan: B must be {L,N}");
    const int N = bs[1];
    check_shape(B.value(), Cc.value(), "selective_scan C");
    if (A.shape() != std::vector<int>{C, N}) throw ContractError("selective_scan: A must be {C,N}");
    if (D.shape() != std::vector<int>{C}) throw ContractError("selective_scan: D must be {C}");
    if (!x.value().all_finite() || !dt.value().all_finite() || !A.value().all_finite())
        throw NumericError("selective_scan: non-finite parameters");

    Tensor y({L, C});
    Tensor h({L, C, N}); // full state history, needed by the backward pass
    for (int t = 0; t < L; ++t) {
        const std::size_t trow = static_cast<std::size_t>(t) * C;
        for (int c = 0; c < C; ++c) {
            const double dtv = dt.value()[trow + c];
            const double xv = x.value()[trow + c];
            const double dbx = dtv * xv;
            const std::size_t hbase = (trow + c) * N;
            const std::size_t hprev = hbase - static_cast<std::size_t>(C) * N;
            const std::size_t abase = static_cast<std::size_t>(c) * N;
            double acc = 0.0;
            for (int n = 0; n < N; ++n) {
                const double a = std::exp(dtv * A.value()[abase + n]);
                const double hp = t > 0 ? h[hprev + n] : 0.0;
                const double hv = a * hp + dbx * B.value()[static_cast<std::size_t>(t) * N + n];
                h[hbase + n] = hv;
                acc += Cc.value()[static_cast<std::size_t>(t) * N + n] * hv;
            }
            y[trow + c] = acc + D.value()[c] * xv;
        }
    }

    return make_op(std::move(y), {x, dt, B, Cc, A, D},
                   [x, dt, B, Cc, A, D, L, C, N, h = std::move(h)](Node& n) {
        Tensor gx({L, C}), gdt({L, C}), gB({L, N}), gC({L, N}), gA({C, N}), gD({C});
        std::vector<double> carry(static_cast<std::size_t>(C) * N, 0.0);
        for (int t = L - 1; t >= 0; --t) {
            const std::size_t trow = static_cast<std::size_t>(t) * C;
            const std::size_t brow = static_cast<std::size_t>(t) * N;
            for (int c = 0; c < C; ++c) {
                const double gy = n.grad[trow + c];
                const double dtv = dt.value()[trow + c];
                const double xv = x.value()[trow + c];
                const std::size_t hbase = (trow + c) * N;
                const std::size_t hprevb = hbase - static_cast<std::size_t>(C) * N;
                const std::size_t abase = static_cast<std::size_t>(c) * N;
                gD[c] += gy * xv;
                double gx_acc = gy * D.value()[c];
                double gdt_acc = 0.0;
                for (int nn = 0; nn < N; ++nn) {
                    const double g_h = gy * Cc.value()[brow + nn] + carry[abase + nn];
                    const double a = std::exp(dtv * A.value()[abase + nn]);
                    const double hp = t > 0 ? h[hprevb + nn] : 0.0;
                    const double bv = B.value()[brow + nn];
                    gA[abase + nn] += g_h * a * dtv * hp;
                    gdt_acc += g_h * (A.value()[abase + nn] * a * hp + bv * xv);
                    gB[brow + nn] += g_h * dtv * xv;
                    gx_acc += g_h * dtv * bv;
                    gC[brow + nn] += gy * h[hbase + nn];
                    carry[abase + nn] = a * g_h;
                }
                gx[trow + c] += gx_acc;
                gdt[trow + c] += gdt_acc;
            }
        }
        add_grad(x, gx);
        add_grad(dt, gdt);
        add_grad(B, gB);
        add_grad(Cc, gC);
        add_grad(A, gA);
        add_grad(D, gD);
    });
}

std::vector<int> scan_order(int H, int W, ScanDir dir) {
    const int L = H * W;
    std::vector<int> order(static_cast<std::size_t>(L));
    switch (dir) {
    case ScanDir::Row:
        for (int i = 0; i < L; ++i) order[static_cast<std::size_t>(i)] = i;
        break;
    case ScanDir::RowRev:
        for (int i = 0; i < L; ++i) order[static_cast<std::size_t>(i)] = L - 1 - i;
        break;
    case ScanDir::Col: {
        int t = 0;
        for (int x = 0; x < W; ++x)
            for (int y = 0; y < H; ++y) order[static_cast<std::size_t>(t++)] = y * W + x;
        break;
    }
    case ScanDir::ColRev: {
        int t = 0;
        for (int x = W - 1; x >= 0; --x)
            for (int y = H - 1; y >= 0; --y) order[static_cast<std::size_t>(t++)] = y * W + x;
        break;
    }
    default:
        throw ContractError("scan_order: invalid direction");
    }
    return order;
}

Var unfold_seq(const Var& f, const std::vector<int>& order) {
    const auto& s = f.shape();
    if (s.size() != 3) throw ContractError("unfold_seq: expected {C,H,W}");
    const int C = s[0];
    const std::size_t plane = static_cast<std::size_t>(s[1]) * s[2];
    if (order.size() != plane) throw ContractError("unfold_seq: order length mismatch");
    const int L = static_cast<int>(plane);
    Tensor out({L, C});
    for (int t = 0; t < L; ++t) {
        const std::size_t p = static_cast<std::size_t>(order[static_cast<std::size_t>(t)]);
        for (int c = 0; c < C; ++c)
            out[static_cast<std::size_t>(t) * C + c] = f.value()[c * plane + p];
    }
    return make_op(std::move(out), {f}, [f, order, C, plane, L](Node& n) {
        if (!f.requires_grad()) return;
        Tensor& g = f.node()->ensure_grad();
        for (int t = 0; t < L; ++t) {
            const std::size_t p = static_cast<std::size_t>(order[static_cast<std::size_t>(t)]);
            for (int c = 0; c < C; ++c)
                g[c * plane + p] += n.grad[static_cast<std::size_t>(t) * C + c];
        }
    });
}

Var fold_seq(const Var& s, const std::vector<int>& order, int H, int W) {
    const auto& ss = s.shape();
    if (ss.size() != 2) throw ContractError("fold_seq: expected {L,C}");
    const int L = ss[0], C = ss[1];
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    if (order.size() != plane || static_cast<std::size_t>(L) != plane)
        throw ContractError("fold_seq: order length mismatch");
    Tensor out({C, H, W});
    for (int t = 0; t < L; ++t) {
        const std::size_t p = static_cast<std::size_t>(order[static_cast<std::size_t>(t)]);
        for (int c = 0; c < C; ++c)
            out[c * plane + p] = s.value()[static_cast<std::size_t>(t) * C + c];
    }
    return make_op(std::move(out), {s}, [s, order, C, plane, L](Node& n) {
        if (!s.requires_grad()) return;
        Tensor& g = s.node()->ensure_grad();
        for (int t = 0; t < L; ++t) {
            const std::size_t p = static_cast<std::size_t>(order[static_cast<std::size_t>(t)]);
            for (int c = 0; c < C; ++c)
                g[static_cast<std::size_t>(t) * C + c] += n.grad[c * plane + p];
        }
    });
}

} // namespace secor::core
