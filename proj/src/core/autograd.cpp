#include "core/autograd.hpp"

#include <unordered_set>

namespace secor::core {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev; }

Var::Var(Tensor v, bool requires_grad) {
    n_ = std::make_shared<Node>();
    n_->value = std::move(v);
    n_->requires_grad = requires_grad && g_grad_enabled;
}

Var Var::from_node(NodePtr n) {
    Var v;
    v.n_ = std::move(n);
    return v;
}

const Tensor& Var::grad() const {
    if (!n_->has_grad) throw ContractError("grad accessed before backward reached this variable");
    return n_->grad;
}

Var Var::detach() const {
    Var v;
    v.n_ = std::make_shared<Node>();
    v.n_->value = n_->value;
    v.n_->requires_grad = false;
    return v;
}

void Var::zero_grad() {
    if (n_->has_grad) n_->grad.fill(0.0);
}

Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backfn) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    bool need = false;
    if (g_grad_enabled) {
        for (const auto& p : parents)
            if (p.defined() && p.requires_grad()) { need = true; break; }
    }
    if (need) {
        n->requires_grad = true;
        n->parents.reserve(parents.size());
        for (auto& p : parents)
            if (p.defined()) n->parents.push_back(p.node());
        n->backfn = std::move(backfn);
    }
    return Var::from_node(std::move(n));
}

void Var::backward() const {
    if (numel() != 1) throw ContractError("backward: root must be a scalar");
    if (!n_->requires_grad) return;

    // Iterative post-order DFS; reverse of the resulting list is a valid
    // execution order (every node before its parents).
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(n_.get(), 0);
    visited.insert(n_.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* p = node->parents[next++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    n_->ensure_grad().data[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (node->backfn && node->has_grad) node->backfn(*node);
    }
}

} // namespace secor::core
