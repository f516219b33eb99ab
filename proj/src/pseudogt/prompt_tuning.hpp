#pragma once

#include <vector>

#include "encoders/prompts.hpp"

namespace secor::pgt {

struct PromptTuneOptions {
    int steps = 200;
    double lr = 0.05;
    double temperature = 1.0; // softmax over raw cosines at 1.0
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.99;
};

struct PromptTuneResult {
    enc::PromptSet prompts;
    std::vector<double> loss_curve; // full-batch mean loss per step
};

// Triplet cross-entropy over image-prompt cosine similarities. Only the three
// prompt parameter vectors are trainable; the towers stay frozen.
PromptTuneResult tune_prompts(const std::vector<img::Image>& well,
                              const std::vector<img::Image>& under,
                              const std::vector<img::Image>& over,
                              const enc::VlEncoder& encoder, const enc::PromptSet& init,
                              const PromptTuneOptions& opt);

// Argmax over the three image-prompt similarities; used for accuracy checks.
enc::ExposureClass predict_class(const img::Image& im, const enc::PromptSet& prompts,
                                 const enc::VlEncoder& encoder);

double classification_accuracy(const std::vector<std::pair<img::Image, enc::ExposureClass>>& samples,
                               const enc::PromptSet& prompts, const enc::VlEncoder& encoder);

} // namespace secor::pgt
