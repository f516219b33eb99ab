#pragma once

#include "encoders/backend.hpp"

namespace secor::enc {

// K equal-width luminance bands over [0,1], one-hot per pixel. Deterministic
// and frozen; gives tests visually meaningful regions.
class StubSegmenter : public Segmenter {
public:
    explicit StubSegmenter(int bands);
    core::Tensor segment(const img::Image& im) const override;
    int channels() const override { return bands_; }
    std::string checksum() const override;

private:
    int bands_;
};

// Statistics-based stand-in for a vision-language tower pair. The image side
// maps s(I) = (mean-luma, mean-R, mean-G, mean-B, rms-contrast) through a
// seeded orthonormal basis and normalizes, so cosines in embedding space equal
// cosines in statistic space and every oracle is hand-checkable. The prompt
// side is a seeded signed permutation (orthogonal and exactly invertible).
class StubVlEncoder : public VlEncoder {
public:
    StubVlEncoder(int embed_dim, int prompt_dim, double anchor_contrast, std::uint64_t seed);

    using VlEncoder::encode_image; // keep the Image convenience overload visible

    core::Var encode_image(const core::Var& img_chw) const override;
    core::Var encode_prompt(const core::Var& prompt) const override;
    int embed_dim() const override { return embed_dim_; }
    int prompt_dim() const override { return prompt_dim_; }
    std::string checksum() const override;

    // Embedding of the statistic target (m,m,m,m,c) for each exposure class;
    // well-exposed sits at mean luma 0.5, under at 0.15, over at 0.85.
    core::Tensor anchor_embedding(ExposureClass c) const;
    // Exact preimage of an anchor under the prompt map.
    core::Tensor anchor_prompt(ExposureClass c) const;

    core::Var statistics(const core::Var& img_chw) const; // {5}
    const core::Tensor& image_basis() const { return basis_; }

private:
    int embed_dim_;
    int prompt_dim_;
    double anchor_contrast_;
    core::Tensor basis_; // {E,5}, orthonormal columns
    std::vector<int> perm_;
    std::vector<double> sign_;
};

} // namespace secor::enc
