#pragma once

#include <memory>
#include <string>

#include "core/ops.hpp"
#include "imaging/image.hpp"

namespace secor::enc {

enum class ExposureClass { Well, Under, Over };
const char* class_name(ExposureClass c);

// Frozen semantic segmenter. Output is a {K,H,W} map aligned with the input;
// the stub emits one-hot luminance bands, pretrained towers may emit soft masks.
class Segmenter {
public:
    virtual ~Segmenter() = default;
    virtual core::Tensor segment(const img::Image& im) const = 0;
    virtual int channels() const = 0;
    virtual std::string checksum() const = 0; // hash of the backend's fixed state
};

// Frozen vision-language tower pair. Both encode paths must be differentiable
// (image for the gamma tuner / alignment loss, prompt for prompt tuning).
class VlEncoder {
public:
    virtual ~VlEncoder() = default;
    virtual core::Var encode_image(const core::Var& img_chw) const = 0; // {3,H,W} -> unit {E}
    virtual core::Var encode_prompt(const core::Var& prompt) const = 0; // {P} -> unit {E}
    virtual int embed_dim() const = 0;
    virtual int prompt_dim() const = 0;
    virtual std::string checksum() const = 0;

    core::Tensor encode_image(const img::Image& im) const;
    core::Tensor encode_prompt_tensor(const core::Tensor& prompt) const;
};

struct EncoderSettings {
    std::string backend = "stub"; // "stub" | "pretrained"
    std::string weights;          // pretrained only
    int embed_dim = 512;
    int prompt_dim = 32;
    double anchor_contrast = 0.2;
    std::uint64_t seed = 0x53454331ull;
};

struct SegmenterSettings {
    std::string backend = "stub";
    std::string weights;
    int bands = 4;
};

std::unique_ptr<Segmenter> make_segmenter(const SegmenterSettings& s);
std::unique_ptr<VlEncoder> make_vl_encoder(const EncoderSettings& s);

} // namespace secor::enc
