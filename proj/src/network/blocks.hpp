#pragma once

#include <string>

#include "core/conv.hpp"
#include "core/fft.hpp"
#include "core/ops.hpp"
#include "core/serialize.hpp"

namespace secor::net {

using core::ParamStore;
using core::Rng;
using core::Tensor;
using core::Var;

struct Conv2d {
    Var w, b;
    int stride = 1, pad = 0;

    Conv2d() = default;
    Conv2d(ParamStore& ps, const std::string& name, int ci, int co, int k, int stride, int pad,
           Rng& rng, bool zero_init = false);
    Var operator()(const Var& x) const { return core::conv2d(x, w, b, stride, pad); }
};

struct ConvT2d {
    Var w, b;
    int stride = 2;

    ConvT2d() = default;
    ConvT2d(ParamStore& ps, const std::string& name, int ci, int co, int k, int stride, Rng& rng);
    Var operator()(const Var& x) const { return core::conv_transpose2d(x, w, b, stride); }
};

struct LayerNorm {
    Var g, b;

    LayerNorm() = default;
    LayerNorm(ParamStore& ps, const std::string& name, int channels);
    Var operator()(const Var& x) const { return core::layer_norm_ch(x, g, b); }
};

// Amplitude/phase refinement in the Fourier domain plus a spatial tail conv;
// forward() adds the block input back so an all-zero tail is an identity.
struct FreqBranch {
    Conv2d amp1, amp2, ph1, ph2, tail;

    FreqBranch() = default;
    FreqBranch(ParamStore& ps, const std::string& name, int channels, Rng& rng);
    Var core_path(const Var& x) const;
    Var forward(const Var& x) const { return core::add(x, core_path(x)); }
};

struct SpatialBranch {
    Conv2d c1, c2, c3;

    SpatialBranch() = default;
    SpatialBranch(ParamStore& ps, const std::string& name, int channels, Rng& rng);
    Var forward(const Var& x) const;
};

// Gated semantic fusion: a per-pixel sigmoid gate computed from the semantic
// feature modulates the projected image feature; frequency and spatial
// feed-forward branches then refine the fused map.
struct Asf {
    LayerNorm ln_img, ln_sem, ln_fused, ln_out;
    Conv2d wq, wkv, fuse;
    FreqBranch freq;
    SpatialBranch spatial;

    Asf() = default;
    Asf(ParamStore& ps, const std::string& name, int channels, Rng& rng);

    Var cross_attention(const Var& f_img, const Var& f_sem) const; // -> E_l
    Var forward(const Var& f_img, const Var& f_sem) const;         // -> E_a
};

struct SpatialAttention {
    Conv2d gate; // 7x7 over [mean_c; max_c]

    SpatialAttention() = default;
    SpatialAttention(ParamStore& ps, const std::string& name, Rng& rng);
    Var forward(const Var& x) const;
};

} // namespace secor::net
