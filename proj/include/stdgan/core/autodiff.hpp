#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "stdgan/core/kernels.hpp"
#include "stdgan/core/tensor.hpp"

namespace stdgan::ad {

// Define-by-run reverse-mode tape. Ops are coarse (whole convolutions), so
// the per-node overhead is irrelevant next to the kernel work.

template <typename T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    std::vector<std::shared_ptr<Node<T>>> parents;
    std::function<void(Node<T>&)> backward_fn;
    bool requires_grad = false;

    Tensor<T>& ensure_grad() {
        if (grad.size() != value.size()) grad = Tensor<T>(value.shape());
        return grad;
    }

    void zero_grad() {
        if (grad.size() == value.size()) grad.fill(T(0));
    }
};

template <typename T>
using Var = std::shared_ptr<Node<T>>;

// Accumulate `g` into the node's gradient, skipping nodes outside the tape.
template <typename T>
inline void accum_grad(const Var<T>& node, const T* g, size_t n) {
    if (!node->requires_grad) return;
    Tensor<T>& dst = node->ensure_grad();
    if (dst.size() != n) throw std::logic_error("accum_grad: size mismatch");
    kern::vaxpy(T(1), g, dst.data(), n);
}

namespace detail {
inline thread_local int g_no_grad_depth = 0;
}

inline bool grad_enabled() { return detail::g_no_grad_depth == 0; }

// Scoped inference mode: ops built inside record no tape.
struct NoGradGuard {
    NoGradGuard() { ++detail::g_no_grad_depth; }
    ~NoGradGuard() { --detail::g_no_grad_depth; }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;
};

template <typename T>
Var<T> make_leaf(Tensor<T> value, bool requires_grad = false) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    return n;
}

template <typename T>
Var<T> make_param(Tensor<T> value) {
    return make_leaf<T>(std::move(value), true);
}

// New leaf sharing no tape history with x (value copied).
template <typename T>
Var<T> detach(const Var<T>& x) {
    return make_leaf<T>(x->value, false);
}

// Record an op node. Parents and the closure are dropped when the result
// cannot need gradients, so inference builds no graph.
template <typename T>
Var<T> make_op(Tensor<T> value, std::vector<Var<T>> parents,
               std::function<void(Node<T>&)> backward_fn) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    if (grad_enabled()) {
        for (const auto& p : parents) {
            if (p->requires_grad) {
                n->requires_grad = true;
                break;
            }
        }
    }
    if (n->requires_grad) {
        n->parents = std::move(parents);
        n->backward_fn = std::move(backward_fn);
    }
    return n;
}

// Reverse-mode sweep from a scalar root. Reverse DFS post-order visits every
// consumer before its producer, so each node's gradient is complete when its
// backward closure runs.
template <typename T>
void backward(const Var<T>& root) {
    if (root->value.size() != 1) throw std::logic_error("backward: root must be scalar");
    if (!root->requires_grad) return;

    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    struct Frame {
        Node<T>* node;
        size_t next_parent;
    };
    std::vector<Frame> stack;
    stack.push_back({root.get(), 0});
    seen.insert(root.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            Node<T>* p = f.node->parents[f.next_parent++].get();
            if (p->requires_grad && seen.insert(p).second)
                stack.push_back({p, 0});
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }

    root->ensure_grad();
    root->grad[0] = T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<T>* n = *it;
        if (n->backward_fn && n->grad.size() == n->value.size())
            n->backward_fn(*n);
    }
}

} // namespace stdgan::ad
