#include "pseudogt/prompt_tuning.hpp"

#include <cmath>

#include "training/adam.hpp"

namespace secor::pgt {

using namespace secor::core;
using enc::ExposureClass;

PromptTuneResult tune_prompts(const std::vector<img::Image>& well,
                              const std::vector<img::Image>& under,
                              const std::vector<img::Image>& over,
                              const enc::VlEncoder& encoder, const enc::PromptSet& init,
                              const PromptTuneOptions& opt) {
    if (well.empty() || under.empty() || over.empty())
        throw ContractError("tune_prompts: every exposure group must be non-empty");
    if (opt.temperature <= 0.0) throw ContractError("tune_prompts: temperature must be positive");

    // Tower outputs are constants; gradients only exist toward the prompts.
    std::vector<std::pair<Tensor, int>> samples; // (unit embedding, class index w/u/o)
    for (const auto& im : well) samples.emplace_back(encoder.encode_image(im), 0);
    for (const auto& im : under) samples.emplace_back(encoder.encode_image(im), 1);
    for (const auto& im : over) samples.emplace_back(encoder.encode_image(im), 2);

    ParamStore params;
    Var p_well = params.add("prompt.well", init.well);
    Var p_under = params.add("prompt.under", init.under);
    Var p_over = params.add("prompt.over", init.over);
    train::Adam adam(params, opt.lr, opt.adam_beta1, opt.adam_beta2);

    PromptTuneResult result;
    const double inv_temp = 1.0 / opt.temperature;
    for (int step = 0; step < opt.steps; ++step) {
        Var e_w = encoder.encode_prompt(p_well);
        Var e_u = encoder.encode_prompt(p_under);
        Var e_o = encoder.encode_prompt(p_over);

        Var loss;
        for (const auto& [embed, label] : samples) {
            Var img_e = constant(embed);
            Var z[3] = {mul_c(cosine_sim(img_e, e_w), inv_temp),
                        mul_c(cosine_sim(img_e, e_u), inv_temp),
                        mul_c(cosine_sim(img_e, e_o), inv_temp)};
            // cross entropy: log-sum-exp minus the true logit (cosines are
            // bounded so the plain form is numerically safe)
            Var lse = log_v(add(add(exp_v(z[0]), exp_v(z[1])), exp_v(z[2])));
            Var ce = sub(lse, z[label]);
            loss = loss.defined() ? add(loss, ce) : ce;
        }
        loss = mul_c(loss, 1.0 / static_cast<double>(samples.size()));
        const double lv = loss.value()[0];
        if (!std::isfinite(lv))
            throw NumericError("tune_prompts: non-finite loss at step " + std::to_string(step));
        result.loss_curve.push_back(lv);

        adam.zero_grad();
        loss.backward();
        adam.step();
    }

    result.prompts.well = p_well.value();
    result.prompts.under = p_under.value();
    result.prompts.over = p_over.value();
    result.prompts.frozen = true;
    return result;
}

ExposureClass predict_class(const img::Image& im, const enc::PromptSet& prompts,
                            const enc::VlEncoder& encoder) {
    const Tensor e = encoder.encode_image(im);
    const double sw = cosine_sim(e, encoder.encode_prompt_tensor(prompts.well));
    const double su = cosine_sim(e, encoder.encode_prompt_tensor(prompts.under));
    const double so = cosine_sim(e, encoder.encode_prompt_tensor(prompts.over));
    if (sw >= su && sw >= so) return ExposureClass::Well;
    return su >= so ? ExposureClass::Under : ExposureClass::Over;
}

double classification_accuracy(const std::vector<std::pair<img::Image, ExposureClass>>& samples,
                               const enc::PromptSet& prompts, const enc::VlEncoder& encoder) {
    if (samples.empty()) return 0.0;
    int hits = 0;
    for (const auto& [im, label] : samples)
        if (predict_class(im, prompts, encoder) == label) ++hits;
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

} // namespace secor::pgt
