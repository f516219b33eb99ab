#include "losses/losses.hpp"

#include <cmath>

namespace secor::loss {

using namespace secor::core;

Var gram(const Var& f) {
    const auto& s = f.shape();
    if (s.size() != 3) throw ContractError("gram: expected {C,H,W}");
    const int C = s[0];
    const int hw = s[1] * s[2];
    Var x = reshape(f, {C, hw});
    // X X^T via matmul with an explicit transpose copy
    Tensor tr({hw, C});
    for (int c = 0; c < C; ++c)
        for (int i = 0; i < hw; ++i)
            tr[static_cast<std::size_t>(i) * C + c] = f.value()[static_cast<std::size_t>(c) * hw + i];
    Var xt_var = make_op(std::move(tr), {f}, [f, C, hw](Node& n) {
        if (!f.requires_grad()) return;
        Tensor& g = f.node()->ensure_grad();
        for (int c = 0; c < C; ++c)
            for (int i = 0; i < hw; ++i)
                g[static_cast<std::size_t>(c) * hw + i] += n.grad[static_cast<std::size_t>(i) * C + c];
    });
    return mul_c(matmul(x, xt_var), 1.0 / static_cast<double>(hw));
}

namespace {

Var ratio_term(const Var& num, const Var& other, double eps) {
    // num / (num + other + eps)
    return bdiv(num, add_c(add(num, other), eps));
}

Var gram_scalar(const Var& ch) {
    // per-channel gram of a 1-channel map collapses to the mean square
    return mean(square(ch));
}

} // namespace

Var sfc_loss(const SemanticFeatureTriple& t, double eps, const std::string& gram_metric) {
    check_shape(t.out_feat.value(), t.pgt_feat.value(), "sfc_loss");
    check_shape(t.out_feat.value(), t.in_feat.value(), "sfc_loss");
    const auto& s = t.out_feat.shape();
    if (s.size() != 3) throw ContractError("sfc_loss: expected {C,H,W} features");
    if (gram_metric != "l1" && gram_metric != "frobenius")
        throw ContractError("sfc_loss: gram_metric must be l1 or frobenius");
    const int C = s[0];

    // The features are compared per channel, so each gram is a single entry
    // and the l1/frobenius entry metrics coincide.
    Var total;
    for (int c = 0; c < C; ++c) {
        Var hf = narrow0(t.out_feat, c, 1);
        Var hg = narrow0(t.pgt_feat, c, 1);
        Var hl = narrow0(t.in_feat, c, 1);

        Var d_fg = mean(abs_v(sub(hf, hg)));
        Var d_fl = mean(abs_v(sub(hf, hl)));
        Var term = ratio_term(d_fg, d_fl, eps);

        Var g_fg = abs_v(sub(gram_scalar(hf), gram_scalar(hg)));
        Var g_fl = abs_v(sub(gram_scalar(hf), gram_scalar(hl)));
        term = add(term, ratio_term(g_fg, g_fl, eps));

        total = total.defined() ? add(total, term) : term;
    }
    return total;
}

Var ipa_loss(const Var& sim_w, const Var& sim_u, const Var& sim_o) {
    if (sim_w.numel() != 1 || sim_u.numel() != 1 || sim_o.numel() != 1)
        throw ContractError("ipa_loss: similarities must be scalars");
    return add(softplus(sub(sim_u, sim_w)), softplus(sub(sim_o, sim_w)));
}

Var spc_loss(const Var& sfc, const Var& ipa, double beta1, double beta2) {
    return add(mul_c(sfc, beta1), mul_c(ipa, beta2));
}

Var cos_color_loss(const Var& out, const Var& pgt, double eps) {
    check_shape(out.value(), pgt.value(), "cos_color_loss");
    const auto& s = out.shape();
    if (s.size() != 3 || s[0] != 3) throw ContractError("cos_color_loss: expected {3,H,W}");
    const std::size_t plane = static_cast<std::size_t>(s[1]) * s[2];

    double acc = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
        const double u0 = out.value()[p], u1 = out.value()[plane + p], u2 = out.value()[2 * plane + p];
        const double v0 = pgt.value()[p], v1 = pgt.value()[plane + p], v2 = pgt.value()[2 * plane + p];
        const double nu = std::sqrt(u0 * u0 + u1 * u1 + u2 * u2);
        const double nv = std::sqrt(v0 * v0 + v1 * v1 + v2 * v2);
        if (nu * nv < eps) continue; // zero-color pixels contribute nothing
        acc += 1.0 - (u0 * v0 + u1 * v1 + u2 * v2) / (nu * nv);
    }
    acc /= static_cast<double>(plane);

    return make_op(Tensor::scalar(acc), {out, pgt}, [out, pgt, plane, eps](Node& n) {
        const double gy = n.grad[0] / static_cast<double>(plane);
        for (std::size_t p = 0; p < plane; ++p) {
            const double u[3] = {out.value()[p], out.value()[plane + p], out.value()[2 * plane + p]};
            const double v[3] = {pgt.value()[p], pgt.value()[plane + p], pgt.value()[2 * plane + p]};
            const double nu = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
            const double nv = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            if (nu * nv < eps) continue;
            const double dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
            if (out.requires_grad()) {
                Tensor& g = out.node()->ensure_grad();
                for (int c = 0; c < 3; ++c) {
                    const double dcos = v[c] / (nu * nv) - dot * u[c] / (nu * nu * nu * nv);
                    g[static_cast<std::size_t>(c) * plane + p] -= gy * dcos;
                }
            }
            if (pgt.requires_grad()) {
                Tensor& g = pgt.node()->ensure_grad();
                for (int c = 0; c < 3; ++c) {
                    const double dcos = u[c] / (nu * nv) - dot * v[c] / (nv * nv * nv * nu);
                    g[static_cast<std::size_t>(c) * plane + p] -= gy * dcos;
                }
            }
        }
    });
}

TotalLossResult total_loss(const Var& out, const Var& pgt, const SemanticFeatureTriple* triple,
                           const PromptSims* sims, const LossWeights& w) {
    check_shape(out.value(), pgt.value(), "total_loss");
    TotalLossResult r;

    Var mse = mean(square(sub(out, pgt)));
    r.mse = mse.value()[0];
    r.w_mse = w.lambda1 * r.mse;
    Var total = mul_c(mse, w.lambda1);

    if (w.use_cos) {
        Var cc = cos_color_loss(out, pgt, w.eps);
        r.cos = cc.value()[0];
        r.w_cos = w.lambda2 * r.cos;
        total = add(total, mul_c(cc, w.lambda2));
    }

    if (w.use_spc && (w.use_sfc || w.use_ipa)) {
        Var sfc, ipa;
        if (w.use_sfc) {
            if (!triple) throw ContractError("total_loss: SFC enabled but no feature triple given");
            sfc = sfc_loss(*triple, w.eps, w.gram_metric);
            r.sfc = sfc.value()[0];
        } else {
            sfc = constant(0.0);
        }
        if (w.use_ipa) {
            if (!sims || !sims->defined())
                throw ContractError("total_loss: IPA enabled but no prompt similarities given");
            ipa = ipa_loss(sims->well, sims->under, sims->over);
            r.ipa = ipa.value()[0];
        } else {
            ipa = constant(0.0);
        }
        Var spc = spc_loss(sfc, ipa, w.beta1, w.beta2);
        r.w_spc = w.lambda3 * spc.value()[0];
        total = add(total, mul_c(spc, w.lambda3));
    }

    r.total = total;
    return r;
}

} // namespace secor::loss
