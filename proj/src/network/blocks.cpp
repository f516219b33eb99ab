#include "network/blocks.hpp"

#include <cmath>

namespace secor::net {

using namespace secor::core;

Conv2d::Conv2d(ParamStore& ps, const std::string& name, int ci, int co, int k, int stride_,
               int pad_, Rng& rng, bool zero_init)
    : stride(stride_), pad(pad_) {
    const double std = zero_init ? 0.0 : std::sqrt(2.0 / (static_cast<double>(ci) * k * k));
    w = ps.add(name + ".w", rng.normal_tensor({co, ci, k, k}, std));
    b = ps.add(name + ".b", Tensor::zeros({co}));
}

ConvT2d::ConvT2d(ParamStore& ps, const std::string& name, int ci, int co, int k, int stride_,
                 Rng& rng)
    : stride(stride_) {
    const double std = std::sqrt(2.0 / (static_cast<double>(ci) * k * k));
    w = ps.add(name + ".w", rng.normal_tensor({ci, co, k, k}, std));
    b = ps.add(name + ".b", Tensor::zeros({co}));
}

LayerNorm::LayerNorm(ParamStore& ps, const std::string& name, int channels) {
    g = ps.add(name + ".g", Tensor::full({channels}, 1.0));
    b = ps.add(name + ".b", Tensor::zeros({channels}));
}

FreqBranch::FreqBranch(ParamStore& ps, const std::string& name, int channels, Rng& rng)
    : amp1(ps, name + ".amp1", channels, channels, 1, 1, 0, rng),
      amp2(ps, name + ".amp2", channels, channels, 1, 1, 0, rng),
      ph1(ps, name + ".ph1", channels, channels, 1, 1, 0, rng),
      ph2(ps, name + ".ph2", channels, channels, 1, 1, 0, rng),
      tail(ps, name + ".tail", channels, channels, 3, 1, 1, rng) {}

Var FreqBranch::core_path(const Var& x) const {
    const auto& s = x.shape();
    Var zero = constant(Tensor::zeros(s));
    Var spec = fft2(pack_complex(x, zero), false);
    Var re = real_part(spec);
    Var im = imag_part(spec);
    Var amp = sqrt_v(add_c(add(square(re), square(im)), 1e-24));
    Var phase = atan2_v(im, re);
    amp = amp2(gelu(amp1(amp)));
    phase = ph2(gelu(ph1(phase)));
    Var re2 = mul(amp, cos_v(phase));
    Var im2 = mul(amp, sin_v(phase));
    Var back = real_part(fft2(pack_complex(re2, im2), true));
    return tail(back);
}

SpatialBranch::SpatialBranch(ParamStore& ps, const std::string& name, int channels, Rng& rng)
    : c1(ps, name + ".c1", channels, channels, 3, 1, 1, rng),
      c2(ps, name + ".c2", channels, channels, 3, 1, 1, rng),
      c3(ps, name + ".c3", channels, channels, 3, 1, 1, rng) {}

Var SpatialBranch::forward(const Var& x) const { return c3(gelu(c2(gelu(c1(x))))); }

Asf::Asf(ParamStore& ps, const std::string& name, int channels, Rng& rng)
    : ln_img(ps, name + ".ln_img", channels),
      ln_sem(ps, name + ".ln_sem", channels),
      ln_fused(ps, name + ".ln_fused", channels),
      ln_out(ps, name + ".ln_out", channels),
      wq(ps, name + ".wq", channels, channels, 1, 1, 0, rng),
      wkv(ps, name + ".wkv", channels, channels, 1, 1, 0, rng),
      fuse(ps, name + ".fuse", channels, channels, 3, 1, 1, rng),
      freq(ps, name + ".freq", channels, rng),
      spatial(ps, name + ".spatial", channels, rng) {}

Var Asf::cross_attention(const Var& f_img, const Var& f_sem) const {
    check_shape(f_img.value(), f_sem.value(), "asf");
    Var gate = sigmoid(wq(ln_sem(f_sem)));
    Var f_med = fuse(mul(wkv(ln_img(f_img)), gate));
    return ln_fused(add(f_img, f_med));
}

Var Asf::forward(const Var& f_img, const Var& f_sem) const {
    Var e_l = cross_attention(f_img, f_sem);
    // freq.forward carries the e_l residual, so this is LN(E_l + FP + SP)
    return ln_out(add(freq.forward(e_l), spatial.forward(e_l)));
}

SpatialAttention::SpatialAttention(ParamStore& ps, const std::string& name, Rng& rng)
    : gate(ps, name + ".gate", 2, 1, 7, 1, 0, rng) {}

Var SpatialAttention::forward(const Var& x) const {
    Var pooled = concat0({channel_mean(x), channel_max(x)});
    // reflect padding keeps the gate shift-consistent on constant maps
    return broadcast_mul_ch(x, sigmoid(gate(reflect_pad2(pooled, 3, 3, 3, 3))));
}

} // namespace secor::net
