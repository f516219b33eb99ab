#pragma once

#include <vector>

#include "core/serialize.hpp"

namespace secor::train {

class Adam {
public:
    Adam(core::ParamStore& params, double lr, double beta1 = 0.9, double beta2 = 0.99,
         double eps = 1e-8);

    void step();
    void zero_grad() { params_->zero_grad(); }

    double lr;
    double beta1, beta2, eps;
    long long t = 0;
    std::vector<core::Tensor> m, v; // first/second moments, parallel to the store

    core::ParamStore& params() { return *params_; }

private:
    core::ParamStore* params_;
};

} // namespace secor::train
