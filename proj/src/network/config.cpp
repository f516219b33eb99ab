#include "network/config.hpp"

#include "common/error.hpp"
#include "core/serialize.hpp"

namespace secor::net {

int NetworkConfig::width(int scale) const {
    int w = base_channels;
    for (int i = 0; i < scale; ++i) w *= channel_multiplier;
    return w;
}

int NetworkConfig::pad_multiple() const { return 1 << (scales - 1); }

void NetworkConfig::validate() const {
    if (scales < 1) throw ConfigError("network.scales must be >= 1");
    if (base_channels < 1 || channel_multiplier < 1 || smb_per_rsmg < 1 || state_dim < 1 ||
        semantic_channels < 1)
        throw ConfigError("network dimensions must be positive");
    if (asf_attention != "gate")
        throw ConfigError("network.asf_attention: only \"gate\" is implemented (\"" + asf_attention +
                          "\" requested; \"softmax\" is reserved)");
}

nlohmann::json NetworkConfig::to_json() const {
    return {{"scales", scales},
            {"base_channels", base_channels},
            {"channel_multiplier", channel_multiplier},
            {"smb_per_rsmg", smb_per_rsmg},
            {"state_dim", state_dim},
            {"semantic_channels", semantic_channels},
            {"asf_attention", asf_attention},
            {"disable_asf", disable_asf},
            {"disable_spatial_attn", disable_spatial_attn}};
}

NetworkConfig NetworkConfig::from_json(const nlohmann::json& j) {
    NetworkConfig c;
    c.scales = j.value("scales", c.scales);
    c.base_channels = j.value("base_channels", c.base_channels);
    c.channel_multiplier = j.value("channel_multiplier", c.channel_multiplier);
    c.smb_per_rsmg = j.value("smb_per_rsmg", c.smb_per_rsmg);
    c.state_dim = j.value("state_dim", c.state_dim);
    c.semantic_channels = j.value("semantic_channels", c.semantic_channels);
    c.asf_attention = j.value("asf_attention", c.asf_attention);
    c.disable_asf = j.value("disable_asf", c.disable_asf);
    c.disable_spatial_attn = j.value("disable_spatial_attn", c.disable_spatial_attn);
    c.validate();
    return c;
}

std::string NetworkConfig::hash() const { return core::sha256_hex(to_json().dump()); }

} // namespace secor::net
