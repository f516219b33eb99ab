#include "network/vmm.hpp"

#include <cmath>

namespace secor::net {

using namespace secor::core;

Vmm::Vmm(ParamStore& ps, const std::string& name, int channels_, int state_dim_, Rng& rng)
    : channels(channels_), state_dim(state_dim_),
      proj(ps, name + ".proj", channels_, channels_, 1, 1, 0, rng) {
    const double pstd = 1.0 / std::sqrt(static_cast<double>(channels));
    for (int d = 0; d < kNumScanDirs; ++d) {
        const std::string base = name + ".dir" + std::to_string(d);
        auto& dp = dirs[static_cast<std::size_t>(d)];
        dp.w_dt = ps.add(base + ".w_dt", rng.normal_tensor({channels, channels}, pstd));

        // softplus(b_dt) lands in [1e-3, 1e-1], log-uniform per channel
        Tensor bdt({channels});
        for (int c = 0; c < channels; ++c) {
            const double dt0 = std::exp(rng.uniform(std::log(1e-3), std::log(1e-1)));
            bdt[static_cast<std::size_t>(c)] = std::log(std::expm1(dt0));
        }
        dp.b_dt = ps.add(base + ".b_dt", std::move(bdt));

        dp.w_b = ps.add(base + ".w_b", rng.normal_tensor({channels, state_dim}, pstd));
        dp.w_c = ps.add(base + ".w_c", rng.normal_tensor({channels, state_dim}, pstd));

        Tensor alog({channels, state_dim});
        for (int c = 0; c < channels; ++c)
            for (int n = 0; n < state_dim; ++n)
                alog[static_cast<std::size_t>(c) * state_dim + n] = std::log(1.0 + n);
        dp.a_log = ps.add(base + ".a_log", std::move(alog));
        dp.skip = ps.add(base + ".skip", Tensor::full({channels}, 1.0));
    }
}

Var Vmm::forward(const Var& f) const {
    const auto& s = f.shape();
    if (s.size() != 3 || s[0] != channels) throw ContractError("vmm: expected {C,H,W}");
    const int H = s[1], W = s[2];

    Var acc;
    for (int d = 0; d < kNumScanDirs; ++d) {
        const auto order = scan_order(H, W, static_cast<ScanDir>(d));
        const auto& dp = dirs[static_cast<std::size_t>(d)];
        Var x = unfold_seq(f, order); // {L,C}
        Var dt = softplus(add_rowvec(matmul(x, dp.w_dt), dp.b_dt));
        Var b = matmul(x, dp.w_b);
        Var cc = matmul(x, dp.w_c);
        Var a = neg(exp_v(dp.a_log));
        Var y = selective_scan(x, dt, b, cc, a, dp.skip);
        Var folded = fold_seq(y, order, H, W);
        acc = acc.defined() ? add(acc, folded) : folded;
    }
    return proj(acc);
}

Smb::Smb(ParamStore& ps, const std::string& name, int channels, int state_dim,
         bool spatial_attn, Rng& rng)
    : ln_scan(ps, name + ".ln_scan", channels),
      ln_conv(ps, name + ".ln_conv", channels),
      vmm(ps, name + ".vmm", channels, state_dim, rng),
      mid(ps, name + ".mid", channels, channels, 3, 1, 1, rng),
      linear(ps, name + ".linear", channels, channels, 1, 1, 0, rng),
      low1(ps, name + ".low1", channels, channels, 3, 1, 1, rng),
      low2(ps, name + ".low2", channels, channels, 3, 1, 1, rng),
      use_spatial_attn(spatial_attn) {
    if (use_spatial_attn) attn = SpatialAttention(ps, name + ".attn", rng);
}

Var Smb::forward(const Var& f) const {
    Var d1 = linear(mid(vmm.forward(ln_scan(f))));
    Var low = low1(ln_conv(f));
    if (use_spatial_attn) low = attn.forward(low);
    Var d2 = low2(low);
    return add(add(f, d1), d2);
}

Rsmg::Rsmg(ParamStore& ps, const std::string& name, int channels, int state_dim, int num_blocks,
           bool spatial_attn, Rng& rng) {
    if (num_blocks < 1) throw ContractError("rsmg: needs at least one block");
    blocks.reserve(static_cast<std::size_t>(num_blocks));
    for (int i = 0; i < num_blocks; ++i)
        blocks.emplace_back(ps, name + ".smb" + std::to_string(i), channels, state_dim,
                            spatial_attn, rng);
    tail = Conv2d(ps, name + ".tail", channels, channels, 3, 1, 1, rng);
}

Var Rsmg::forward(const Var& f) const {
    Var cur = f;
    for (const auto& b : blocks) cur = b.forward(cur);
    return add(f, tail(cur));
}

} // namespace secor::net
