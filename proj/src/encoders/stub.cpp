#include "encoders/stub.hpp"

#include <algorithm>
#include <cmath>

#include "core/serialize.hpp"

namespace secor::enc {

using namespace secor::core;

const char* class_name(ExposureClass c) {
    switch (c) {
    case ExposureClass::Well: return "well";
    case ExposureClass::Under: return "under";
    default: return "over";
    }
}

core::Tensor VlEncoder::encode_image(const img::Image& im) const {
    NoGradGuard ng;
    return encode_image(Var(im.to_tensor())).value();
}

core::Tensor VlEncoder::encode_prompt_tensor(const core::Tensor& prompt) const {
    NoGradGuard ng;
    return encode_prompt(Var(prompt)).value();
}

StubSegmenter::StubSegmenter(int bands) : bands_(bands) {
    if (bands < 1) throw ContractError("segmenter: bands must be >= 1");
}

core::Tensor StubSegmenter::segment(const img::Image& im) const {
    im.validate("segment");
    const int H = im.height, W = im.width;
    Tensor out({bands_, H, W});
    const std::size_t plane = im.plane();
    for (std::size_t i = 0; i < plane; ++i) {
        const double luma = (im.data[i] + im.data[plane + i] + im.data[2 * plane + i]) / 3.0;
        int band = static_cast<int>(luma * bands_);
        band = std::min(bands_ - 1, std::max(0, band));
        out[static_cast<std::size_t>(band) * plane + i] = 1.0;
    }
    return out;
}

std::string StubSegmenter::checksum() const {
    const std::string tag = "stub-luminance-bands:" + std::to_string(bands_);
    return sha256_hex(tag);
}

StubVlEncoder::StubVlEncoder(int embed_dim, int prompt_dim, double anchor_contrast,
                             std::uint64_t seed)
    : embed_dim_(embed_dim), prompt_dim_(prompt_dim), anchor_contrast_(anchor_contrast) {
    if (embed_dim < 8) throw ContractError("encoder: embed_dim too small");
    if (prompt_dim != embed_dim)
        throw ContractError("stub encoder: prompt_dim must equal embed_dim (signed permutation map)");

    // Orthonormalized seeded Gaussian columns so the map preserves cosines.
    Rng rng(seed);
    const int S = 5;
    std::vector<std::vector<double>> cols(S, std::vector<double>(embed_dim_));
    for (int j = 0; j < S; ++j) {
        for (int i = 0; i < embed_dim_; ++i) cols[j][i] = rng.normal();
        for (int k = 0; k < j; ++k) {
            double dot = 0.0;
            for (int i = 0; i < embed_dim_; ++i) dot += cols[j][i] * cols[k][i];
            for (int i = 0; i < embed_dim_; ++i) cols[j][i] -= dot * cols[k][i];
        }
        double nrm = 0.0;
        for (int i = 0; i < embed_dim_; ++i) nrm += cols[j][i] * cols[j][i];
        nrm = std::sqrt(nrm);
        for (int i = 0; i < embed_dim_; ++i) cols[j][i] /= nrm;
    }
    basis_ = Tensor({embed_dim_, S});
    for (int i = 0; i < embed_dim_; ++i)
        for (int j = 0; j < S; ++j) basis_[static_cast<std::size_t>(i) * S + j] = cols[j][i];

    perm_.resize(static_cast<std::size_t>(embed_dim_));
    for (int i = 0; i < embed_dim_; ++i) perm_[static_cast<std::size_t>(i)] = i;
    fisher_yates(perm_, rng);
    sign_.resize(static_cast<std::size_t>(embed_dim_));
    for (auto& s : sign_) s = rng.bernoulli() ? 1.0 : -1.0;
}

Var StubVlEncoder::statistics(const Var& x) const {
    const auto& s = x.shape();
    if (s.size() != 3 || s[0] != 3) throw ContractError("encode_image: expected {3,H,W}");
    Var r = narrow0(x, 0, 1), g = narrow0(x, 1, 1), b = narrow0(x, 2, 1);
    Var luma = mul_c(add(add(r, g), b), 1.0 / 3.0);
    Var mean_luma = mean(luma);
    Var centered = badd(luma, mul_c(mean_luma, -1.0));
    Var rms = sqrt_v(add_c(mean(square(centered)), 1e-12));
    // mean statistics are centered at mid-gray; raw positive means would be
    // nearly colinear in cosine space and the class anchors would not separate
    return stack_scalars({add_c(mean_luma, -0.5), add_c(mean(r), -0.5), add_c(mean(g), -0.5),
                          add_c(mean(b), -0.5), rms});
}

namespace {
Var normalize_vec(const Var& v) {
    return bdiv(v, sqrt_v(add_c(sum(square(v)), 1e-24)));
}
} // namespace

Var StubVlEncoder::encode_image(const Var& img_chw) const {
    Var s = reshape(statistics(img_chw), {5, 1});
    Var e = reshape(matmul(constant(basis_), s), {embed_dim_});
    return normalize_vec(e);
}

Var StubVlEncoder::encode_prompt(const Var& prompt) const {
    if (prompt.shape() != std::vector<int>{prompt_dim_})
        throw ContractError("encode_prompt: expected a {prompt_dim} vector");
    Tensor out({embed_dim_});
    for (int i = 0; i < embed_dim_; ++i)
        out[static_cast<std::size_t>(perm_[static_cast<std::size_t>(i)])] =
            sign_[static_cast<std::size_t>(i)] * prompt.value()[static_cast<std::size_t>(i)];
    // captured by value: the tape may outlive this encoder
    Var mapped = make_op(std::move(out), {prompt}, [prompt, perm = perm_, sign = sign_](Node& n) {
        if (!prompt.requires_grad()) return;
        Tensor& g = prompt.node()->ensure_grad();
        for (std::size_t i = 0; i < g.numel(); ++i)
            g[i] += sign[i] * n.grad[static_cast<std::size_t>(perm[i])];
    });
    return normalize_vec(mapped);
}

std::string StubVlEncoder::checksum() const {
    std::string bytes(reinterpret_cast<const char*>(basis_.data.data()),
                      basis_.numel() * sizeof(double));
    bytes.append(reinterpret_cast<const char*>(perm_.data()), perm_.size() * sizeof(int));
    bytes.append(reinterpret_cast<const char*>(sign_.data()), sign_.size() * sizeof(double));
    return sha256_hex(bytes.data(), bytes.size());
}

core::Tensor StubVlEncoder::anchor_embedding(ExposureClass c) const {
    double m = 0.5;
    if (c == ExposureClass::Under) m = 0.15;
    if (c == ExposureClass::Over) m = 0.85;
    Tensor s({5});
    s[0] = s[1] = s[2] = s[3] = m - 0.5;
    s[4] = anchor_contrast_;
    double nrm = 0.0;
    for (double v : s.data) nrm += v * v;
    nrm = std::sqrt(nrm);
    Tensor e({embed_dim_});
    for (int i = 0; i < embed_dim_; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 5; ++j) acc += basis_[static_cast<std::size_t>(i) * 5 + j] * s[j];
        e[static_cast<std::size_t>(i)] = acc / nrm;
    }
    return e;
}

core::Tensor StubVlEncoder::anchor_prompt(ExposureClass c) const {
    const Tensor e = anchor_embedding(c);
    Tensor p({prompt_dim_});
    for (int i = 0; i < prompt_dim_; ++i)
        p[static_cast<std::size_t>(i)] =
            sign_[static_cast<std::size_t>(i)] * e[static_cast<std::size_t>(perm_[static_cast<std::size_t>(i)])];
    return p;
}

std::unique_ptr<Segmenter> make_segmenter(const SegmenterSettings& s) {
    if (s.backend == "stub") return std::make_unique<StubSegmenter>(s.bands);
    if (s.backend == "pretrained")
        throw BackendError("pretrained segmenter backend selected but no external tower is linked "
                           "in this build (weights: " + (s.weights.empty() ? "<unset>" : s.weights) + ")");
    throw ConfigError("unknown segmenter backend: " + s.backend);
}

std::unique_ptr<VlEncoder> make_vl_encoder(const EncoderSettings& s) {
    if (s.backend == "stub")
        return std::make_unique<StubVlEncoder>(s.embed_dim, s.embed_dim, s.anchor_contrast, s.seed);
    if (s.backend == "pretrained")
        throw BackendError("pretrained vision-language backend selected but no external tower is "
                           "linked in this build (weights: " + (s.weights.empty() ? "<unset>" : s.weights) + ")");
    throw ConfigError("unknown encoder backend: " + s.backend);
}

} // namespace secor::enc
