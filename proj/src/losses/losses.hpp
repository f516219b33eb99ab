#pragma once

#include "core/ops.hpp"

namespace secor::loss {

using core::Var;

struct LossWeights {
    double lambda1 = 1.0; // intensity (MSE)
    double lambda2 = 0.5; // color cosine
    double lambda3 = 0.1; // semantic-prompt consistency
    double beta1 = 1.0;   // semantic feature consistency inside SPC
    double beta2 = 1.0;   // image-prompt alignment inside SPC
    double eps = 1e-8;    // ratio-denominator stabilizer
    bool use_spc = true;
    bool use_ipa = true;
    bool use_sfc = true;
    bool use_cos = true;
    std::string gram_metric = "l1"; // "l1" | "frobenius"
};

// Semantic feature maps of the network output, pseudo-GT and input.
struct SemanticFeatureTriple {
    Var out_feat; // h_f
    Var pgt_feat; // h_g
    Var in_feat;  // h_l
};

// G = X X^T / (H*W), X the {C, H*W} flattening.
Var gram(const Var& f);

// Per semantic channel: D_fg/(D_fg+D_fl+eps) + G_fg/(G_fg+G_fl+eps), summed
// over channels. D is the mean absolute map difference; G compares the
// per-channel gram entries.
Var sfc_loss(const SemanticFeatureTriple& t, double eps = 1e-8,
             const std::string& gram_metric = "l1");

// sum over {under, over} of log(1 + exp(sim_i - sim_w)).
Var ipa_loss(const Var& sim_w, const Var& sim_u, const Var& sim_o);

Var spc_loss(const Var& sfc, const Var& ipa, double beta1, double beta2);

// Mean over pixels of 1 - cos(rgb_out, rgb_pgt); pixels where either vector
// has near-zero norm contribute exactly 0.
Var cos_color_loss(const Var& out, const Var& pgt, double eps = 1e-8);

struct PromptSims {
    Var well, under, over;
    bool defined() const { return well.defined(); }
};

struct TotalLossResult {
    Var total;
    // raw term values (0.0 when a switch disables the term)
    double mse = 0.0, cos = 0.0, sfc = 0.0, ipa = 0.0;
    // weighted contributions, summing exactly to total
    double w_mse = 0.0, w_cos = 0.0, w_spc = 0.0;
};

TotalLossResult total_loss(const Var& out, const Var& pgt, const SemanticFeatureTriple* triple,
                           const PromptSims* sims, const LossWeights& w);

} // namespace secor::loss
