#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "encoders/backend.hpp"
#include "losses/losses.hpp"
#include "network/config.hpp"
#include "pseudogt/generator.hpp"
#include "pseudogt/prompt_tuning.hpp"
#include "training/trainer.hpp"

namespace secor {

// Experiment configuration: a JSON tree with defaults, file values and
// explicit overrides merged in that order.
struct AppConfig {
    std::uint64_t seed = 1234;
    enc::EncoderSettings encoder;
    enc::SegmenterSettings segmenter;
    net::NetworkConfig network;
    loss::LossWeights loss;
    train::TrainSettings train;
    pgt::GammaTunerOptions gamma;
    pgt::PromptTuneOptions prompt_tuning;
    std::map<std::string, std::string> folder_tags;
    bool force_load = false;

    static AppConfig from_json(const nlohmann::json& j);
    static nlohmann::json default_json();
};

nlohmann::json merge_config(nlohmann::json base, const nlohmann::json& overlay);

// Assign into a dotted path like "network.scales", creating intermediate
// objects as needed.
void set_by_path(nlohmann::json& root, const std::string& dotted, const nlohmann::json& value);
const nlohmann::json* get_by_path(const nlohmann::json& root, const std::string& dotted);

} // namespace secor
