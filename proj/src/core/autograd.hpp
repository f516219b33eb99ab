#pragma once

#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "core/tensor.hpp"

namespace secor::core {

struct Node;
using NodePtr = std::shared_ptr<Node>;

// One vertex of the reverse-mode tape. `backfn` consumes this node's grad and
// scatters into the parents' grads; it captures any saved forward state.
struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    std::vector<NodePtr> parents;
    std::function<void(Node&)> backfn;

    Tensor& ensure_grad() {
        if (!has_grad) {
            grad = Tensor::zeros(value.shape);
            has_grad = true;
        }
        return grad;
    }
};

bool grad_enabled();

// Scoped tape switch: forward passes inside the guard record nothing.
struct NoGradGuard {
    bool prev;
    NoGradGuard();
    ~NoGradGuard();
};

class Var {
public:
    Var() = default;
    explicit Var(Tensor v, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(n_); }
    const Tensor& value() const { return n_->value; }
    Tensor& value() { return n_->value; }
    const Tensor& grad() const;
    bool requires_grad() const { return n_ && n_->requires_grad; }
    const std::vector<int>& shape() const { return n_->value.shape; }
    std::size_t numel() const { return n_->value.numel(); }

    Var detach() const;
    void zero_grad();
    void backward() const;

    const NodePtr& node() const { return n_; }
    static Var from_node(NodePtr n);

private:
    NodePtr n_;
};

// Builds an op node. When the tape is off or no parent requires grad, the
// result degrades to a constant leaf and `backfn` is dropped.
Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backfn);

inline void add_grad(const Var& p, const Tensor& g) {
    if (!p.node()->requires_grad) return;
    Tensor& pg = p.node()->ensure_grad();
    for (std::size_t i = 0; i < g.numel(); ++i) pg[i] += g[i];
}

} // namespace secor::core
