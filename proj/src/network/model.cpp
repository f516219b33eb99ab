#include "network/model.hpp"

#include <cmath>

namespace secor::net {

using namespace secor::core;

void InspectSink::record(const std::string& name, const Tensor& t) {
    Entry e;
    e.name = name;
    e.shape = t.shape;
    double m = 0.0;
    double lo = t.numel() ? t[0] : 0.0, hi = lo;
    for (double v : t.data) {
        m += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    m /= static_cast<double>(t.numel());
    double var = 0.0;
    for (double v : t.data) var += (v - m) * (v - m);
    var /= static_cast<double>(t.numel());
    e.mean = m;
    e.stddev = std::sqrt(var);
    e.min = lo;
    e.max = hi;
    entries.push_back(std::move(e));
}

SemanticTrunk::SemanticTrunk(ParamStore& ps, const std::string& name, const NetworkConfig& cfg,
                             Rng& rng)
    : embed(ps, name + ".embed", cfg.semantic_channels, cfg.base_channels, 3, 1, 1, rng) {
    proj.reserve(static_cast<std::size_t>(cfg.scales));
    for (int m = 0; m < cfg.scales; ++m)
        proj.emplace_back(ps, name + ".proj" + std::to_string(m), cfg.base_channels, cfg.width(m),
                          1, 1, 0, rng);
}

std::vector<Var> SemanticTrunk::pyramid(const Var& seg) const {
    std::vector<Var> out;
    Var cur = embed(seg);
    for (std::size_t m = 0; m < proj.size(); ++m) {
        if (m) cur = avg_pool2x2(cur);
        out.push_back(proj[m](cur));
    }
    return out;
}

Simr::Simr(ParamStore& ps, const std::string& name, const NetworkConfig& cfg, int channels,
           Rng& rng) {
    if (cfg.disable_asf)
        bypass_ln = LayerNorm(ps, name + ".bypass_ln", channels);
    else
        asf.emplace(ps, name + ".asf", channels, rng);
    rsmg = Rsmg(ps, name + ".rsmg", channels, cfg.state_dim, cfg.smb_per_rsmg,
                !cfg.disable_spatial_attn, rng);
}

Var Simr::forward(const Var& f_img, const Var& f_sem) const {
    Var fused = asf ? asf->forward(f_img, f_sem) : bypass_ln(f_img);
    return rsmg.forward(fused);
}

CorrectionNet::CorrectionNet(const NetworkConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(seed);
    // The trunk doubles as the semantic-feature extractor for the consistency
    // loss, so it exists even when fusion is ablated.
    trunk_ = SemanticTrunk(params_, "trunk", cfg_, rng);
    shallow_ = Conv2d(params_, "shallow", 3, cfg_.base_channels, 3, 1, 1, rng);
    for (int m = 0; m < cfg_.scales; ++m) {
        encoder_.emplace_back(params_, "enc" + std::to_string(m), cfg_, cfg_.width(m), rng);
        if (m + 1 < cfg_.scales)
            down_.emplace_back(params_, "down" + std::to_string(m), cfg_.width(m), cfg_.width(m + 1),
                               4, 2, 1, rng);
    }
    for (int m = cfg_.scales - 2; m >= 0; --m) {
        up_.emplace_back(params_, "up" + std::to_string(m), cfg_.width(m + 1), cfg_.width(m), 2, 2,
                         rng);
        fuse_.emplace_back(params_, "skipfuse" + std::to_string(m), 2 * cfg_.width(m), cfg_.width(m),
                           1, 1, 0, rng);
        decoder_.emplace_back(params_, "dec" + std::to_string(m), cfg_, cfg_.width(m), rng);
    }
    // zero-initialized head: the network is exactly the identity until trained
    head_ = Conv2d(params_, "head", cfg_.base_channels, 3, 3, 1, 1, rng, /*zero_init=*/true);
}

Var CorrectionNet::forward(const Tensor& image, const Tensor& seg, InspectSink* sink) const {
    return forward(Var(image), Var(seg), sink);
}

Var CorrectionNet::forward(const Var& image, const Var& seg, InspectSink* sink) const {
    const auto& s = image.shape();
    if (s.size() != 3 || s[0] != 3) throw ContractError("network: image must be {3,H,W}");
    if (!cfg_.disable_asf) {
        const auto& gs = seg.shape();
        if (gs.size() != 3 || gs[0] != cfg_.semantic_channels || gs[1] != s[1] || gs[2] != s[2])
            throw ContractError("network: segmentation map must be {K,H,W} aligned with the image");
    }
    const int H = s[1], W = s[2];
    const int mult = cfg_.pad_multiple();
    const int ph = (mult - H % mult) % mult;
    const int pw = (mult - W % mult) % mult;

    Var x = image, g = seg;
    if (ph || pw) {
        x = reflect_pad2(x, 0, ph, 0, pw);
        if (!cfg_.disable_asf) g = reflect_pad2(g, 0, ph, 0, pw);
    }

    std::vector<Var> sem;
    if (!cfg_.disable_asf) sem = trunk_.pyramid(g);
    auto sem_at = [&](int m) { return cfg_.disable_asf ? Var() : sem[static_cast<std::size_t>(m)]; };

    Var cur = shallow_(x);
    if (sink) sink->record("shallow", cur.value());

    std::vector<Var> skips;
    for (int m = 0; m < cfg_.scales; ++m) {
        cur = encoder_[static_cast<std::size_t>(m)].forward(cur, sem_at(m));
        if (sink) sink->record("enc" + std::to_string(m), cur.value());
        skips.push_back(cur);
        if (m + 1 < cfg_.scales) cur = down_[static_cast<std::size_t>(m)](cur);
    }

    for (std::size_t i = 0; i < decoder_.size(); ++i) {
        const int m = cfg_.scales - 2 - static_cast<int>(i);
        cur = up_[i](cur);
        cur = fuse_[i](concat0({cur, skips[static_cast<std::size_t>(m)]}));
        cur = decoder_[i].forward(cur, sem_at(m));
        if (sink) sink->record("dec" + std::to_string(m), cur.value());
    }

    Var residual = head_(cur);
    if (sink) sink->record("residual", residual.value());
    Var out = clamp01(add(x, residual));
    if (ph || pw) out = crop2(out, 0, 0, H, W);
    return out;
}

} // namespace secor::net
