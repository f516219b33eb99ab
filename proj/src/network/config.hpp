#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace secor::net {

struct NetworkConfig {
    int scales = 3;            // pyramid depth M
    int base_channels = 32;
    int channel_multiplier = 2;
    int smb_per_rsmg = 4;
    int state_dim = 16;        // SSM state size N
    int semantic_channels = 4; // must match the segmenter's channel count
    std::string asf_attention = "gate"; // "softmax" is reserved, not implemented
    bool disable_asf = false;
    bool disable_spatial_attn = false;

    int width(int scale) const;
    int pad_multiple() const; // 2^(scales-1)
    void validate() const;

    nlohmann::json to_json() const;
    static NetworkConfig from_json(const nlohmann::json& j);

    // Hash over everything that defines parameter shapes and graph structure;
    // checkpoints refuse to load across a mismatch.
    std::string hash() const;
};

} // namespace secor::net
