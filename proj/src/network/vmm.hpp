#pragma once

#include <array>
#include <vector>

#include "core/scan.hpp"
#include "network/blocks.hpp"

namespace secor::net {

// Four-direction 2D selective scan with a shared 1x1 channel-mixing output
// projection. Each direction owns its sequence projections and SSM state.
struct Vmm {
    int channels = 0, state_dim = 0;
    struct DirParams {
        Var w_dt, b_dt; // {C,C}, {C}
        Var w_b, w_c;   // {C,N}
        Var a_log;      // {C,N}; A = -exp(a_log)
        Var skip;       // {C}
    };
    std::array<DirParams, core::kNumScanDirs> dirs;
    Conv2d proj;

    Vmm() = default;
    Vmm(ParamStore& ps, const std::string& name, int channels, int state_dim, Rng& rng);

    Var forward(const Var& f) const;
};

// Scan block: the scan path (norm -> scan -> conv -> per-pixel linear) plus a
// convolutional path with optional spatial attention, fused by addition onto
// the block input.
struct Smb {
    LayerNorm ln_scan, ln_conv;
    Vmm vmm;
    Conv2d mid, linear; // 3x3 then 1x1
    Conv2d low1, low2;  // 3x3 convs around the attention gate
    bool use_spatial_attn = true;
    SpatialAttention attn;

    Smb() = default;
    Smb(ParamStore& ps, const std::string& name, int channels, int state_dim,
        bool spatial_attn, Rng& rng);

    Var forward(const Var& f) const;
};

struct Rsmg {
    std::vector<Smb> blocks;
    Conv2d tail;

    Rsmg() = default;
    Rsmg(ParamStore& ps, const std::string& name, int channels, int state_dim, int num_blocks,
         bool spatial_attn, Rng& rng);

    Var forward(const Var& f) const;
};

} // namespace secor::net
