#include "training/adam.hpp"

#include <cmath>

namespace secor::train {

using core::Tensor;

Adam::Adam(core::ParamStore& params, double lr_, double beta1_, double beta2_, double eps_)
    : lr(lr_), beta1(beta1_), beta2(beta2_), eps(eps_), params_(&params) {
    if (!(lr >= 0.0)) throw ContractError("adam: learning rate must be non-negative");
    for (const auto& [name, p] : params.items()) {
        m.push_back(Tensor::zeros(p.shape()));
        v.push_back(Tensor::zeros(p.shape()));
    }
}

void Adam::step() {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    auto& items = params_->items();
    for (std::size_t i = 0; i < items.size(); ++i) {
        auto& p = items[i].second;
        const bool has = p.node()->has_grad;
        Tensor& pm = m[i];
        Tensor& pv = v[i];
        for (std::size_t j = 0; j < p.numel(); ++j) {
            const double g = has ? p.node()->grad[j] : 0.0;
            pm[j] = beta1 * pm[j] + (1.0 - beta1) * g;
            pv[j] = beta2 * pv[j] + (1.0 - beta2) * g * g;
            const double mh = pm[j] / bc1;
            const double vh = pv[j] / bc2;
            p.value()[j] -= lr * mh / (std::sqrt(vh) + eps);
        }
    }
}

} // namespace secor::train
