#pragma once

#include <optional>
#include <string>

#include "encoders/prompts.hpp"

namespace secor::pgt {

struct GammaTunerOptions {
    double gamma_init_under = 2.0;
    double gamma_init_over = 0.5;
    double gamma_min = 0.1;
    double gamma_max = 5.0;
    double lr = 0.05;
    double tol = 1e-4;
    int max_iters = 100;
};

struct GammaResult {
    double gamma = 1.0;
    double final_similarity = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct Classification {
    enc::ExposureClass cls; // under or over, never well
    double sim_u = 0.0;
    double sim_o = 0.0;
};

// Two-way decision over the tuned under/over prompts; ties resolve to under
// (brightening is the safer default).
Classification classify_exposure(const img::Image& im, const enc::PromptSet& prompts,
                                 const enc::VlEncoder& encoder);

// The curve 1-(1-I)^gamma as a function of a scalar gamma variable.
core::Var gamma_image(const core::Tensor& image_chw, const core::Var& gamma);

// Objective evaluated by the tuner: cos(image-embed(gamma curve), well-prompt).
double gamma_objective(const img::Image& im, const core::Tensor& well_text_embed,
                       const enc::VlEncoder& encoder, double gamma);

// Monotone gradient ascent with doubling/halving line search, gamma clamped
// to [gamma_min, gamma_max] throughout.
GammaResult tune_gamma(const img::Image& im, const core::Tensor& well_text_embed,
                       const enc::VlEncoder& encoder, double gamma0,
                       const GammaTunerOptions& opt);

struct PgtOutput {
    img::Image image;
    GammaResult gamma;
    Classification cls;
};

PgtOutput generate_pseudo_gt(const img::Image& im, const enc::PromptSet& prompts,
                             const enc::VlEncoder& encoder, const GammaTunerOptions& opt);

// Disk cache: <root>/<sha256(image bytes)>.<prompt hash16>.png plus a JSON
// sidecar with gamma, similarities, class and iteration count.
class PgtCache {
public:
    PgtCache(std::string root, const enc::PromptSet& prompts);

    std::string key_for(const std::string& image_path) const;
    std::string png_path(const std::string& key) const;
    std::string json_path(const std::string& key) const;

    std::optional<PgtOutput> load(const std::string& image_path) const;
    void store(const std::string& image_path, const PgtOutput& out) const;

private:
    std::string root_;
    std::string prompt_hash_;
};

struct GenerateStats {
    int written = 0;
    int cached = 0;
};

// Idempotent over a directory of images.
GenerateStats generate_pgt_dir(const std::string& input_dir, const enc::PromptSet& prompts,
                               const enc::VlEncoder& encoder, const GammaTunerOptions& opt,
                               const std::string& cache_dir);

} // namespace secor::pgt
