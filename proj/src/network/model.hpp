#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "network/config.hpp"
#include "network/vmm.hpp"

namespace secor::net {

// Named activation statistics collected during a forward pass (diagnostics).
struct InspectSink {
    struct Entry {
        std::string name;
        std::vector<int> shape;
        double mean, stddev, min, max;
    };
    std::vector<Entry> entries;
    void record(const std::string& name, const Tensor& t);
};

// Semantic feature trunk: embeds the segmentation map once at full resolution,
// then builds the per-scale pyramid by 2x average pooling + 1x1 projection.
struct SemanticTrunk {
    Conv2d embed;
    std::vector<Conv2d> proj;

    SemanticTrunk() = default;
    SemanticTrunk(ParamStore& ps, const std::string& name, const NetworkConfig& cfg, Rng& rng);

    Var full_res(const Var& seg) const { return embed(seg); }
    std::vector<Var> pyramid(const Var& seg) const;
};

// One reconstruction scale: semantic fusion (or a plain LN bypass when fusion
// is ablated) followed by the residual scan group.
struct Simr {
    std::optional<Asf> asf;
    LayerNorm bypass_ln;
    Rsmg rsmg;

    Simr() = default;
    Simr(ParamStore& ps, const std::string& name, const NetworkConfig& cfg, int channels, Rng& rng);

    Var forward(const Var& f_img, const Var& f_sem) const;
};

class CorrectionNet {
public:
    CorrectionNet(const NetworkConfig& cfg, std::uint64_t seed);

    const NetworkConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    // Residual correction: clamp(input + head(features), 0, 1). Inputs whose
    // sides are not divisible by 2^(scales-1) are reflect-padded and cropped.
    Var forward(const Var& image, const Var& seg, InspectSink* sink = nullptr) const;
    Var forward(const Tensor& image, const Tensor& seg, InspectSink* sink = nullptr) const;

    const SemanticTrunk& semantic_trunk() const { return trunk_; }

private:
    NetworkConfig cfg_;
    ParamStore params_;
    SemanticTrunk trunk_;
    Conv2d shallow_;
    std::vector<Simr> encoder_;
    std::vector<Conv2d> down_;
    std::vector<ConvT2d> up_;
    std::vector<Conv2d> fuse_;
    std::vector<Simr> decoder_;
    Conv2d head_;
};

} // namespace secor::net
