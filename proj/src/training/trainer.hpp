#pragma once

#include <string>
#include <vector>

#include "imaging/manifest.hpp"
#include "losses/losses.hpp"
#include "network/model.hpp"
#include "pseudogt/generator.hpp"
#include "training/adam.hpp"

namespace secor::train {

struct TrainSettings {
    double lr = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.99;
    int batch_size = 8;
    int input_size = 384;
    long long steps = 0;  // explicit step budget, or
    long long epochs = 0; // full passes; exactly one of the two must be set
    long long checkpoint_every = 500;
    bool augment = true;
    std::uint64_t seed = 1234;
};

struct TrainResult {
    std::string final_checkpoint;
    std::string best_checkpoint; // set when a validation manifest is given
    std::vector<double> loss_curve;
    long long steps_run = 0;
};

// Unsupervised training against cached pseudo-GT targets. Only network
// parameters are updated; prompts and encoder towers stay frozen. The run is
// bit-deterministic for a fixed seed and resumable from any checkpoint.
TrainResult train(net::CorrectionNet& model, const TrainSettings& ts,
                  const loss::LossWeights& lw, const enc::Segmenter& segmenter,
                  const enc::VlEncoder& encoder, const enc::PromptSet& prompts,
                  const pgt::GammaTunerOptions& gopt, const img::DatasetManifest& manifest,
                  const std::string& pgt_cache_dir, const std::string& out_dir,
                  const std::string& resume_path = "",
                  const img::DatasetManifest* val_manifest = nullptr);

// Frozen semantic features used by the consistency loss: the trunk's embed
// conv applied to a segmentation map, weights treated as constants.
core::Tensor frozen_semantic_features(const net::CorrectionNet& model, const core::Tensor& seg);

} // namespace secor::train
