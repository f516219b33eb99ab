#pragma once

#include "encoders/backend.hpp"

namespace secor::enc {

// Three learnable prompt parameter vectors, one per exposure class.
struct PromptSet {
    core::Tensor well;
    core::Tensor under;
    core::Tensor over;
    bool frozen = false;

    const core::Tensor& of(ExposureClass c) const {
        switch (c) {
        case ExposureClass::Well: return well;
        case ExposureClass::Under: return under;
        default: return over;
        }
    }

    static PromptSet random_init(const VlEncoder& enc, std::uint64_t seed);
    std::string hash() const;       // sha256 over the three parameter blobs
    std::string short_hash() const; // first 16 hex chars, used in cache names
};

void save_prompts(const PromptSet& p, const std::string& path);
PromptSet load_prompts(const std::string& path, const VlEncoder& enc);

} // namespace secor::enc
