#include "core/tensor.hpp"

#include <sstream>

namespace secor::core {

std::size_t Tensor::count(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) {
        if (d < 0) throw ContractError("tensor dimension must be non-negative");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

Tensor Tensor::scalar(double v) {
    Tensor t({1});
    t.data[0] = v;
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

void check_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b))
        throw ContractError(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

Tensor Rng::normal_tensor(std::vector<int> shape, double stddev) {
    Tensor t(std::move(shape));
    for (auto& v : t.data) v = normal() * stddev;
    return t;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2));
    return splitmix64(s);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

} // namespace secor::core
