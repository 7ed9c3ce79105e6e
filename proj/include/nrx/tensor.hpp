#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "nrx/shape.hpp"

namespace nrx {

// Dense 4-d tensor with reverse-mode differentiation. A Tensor is a cheap
// handle onto shared storage; ops record a closure graph that backward()
// walks in reverse topological order. One graph is single-threaded by
// contract; independent graphs may live on different threads.
template <typename T>
class Tensor {
    struct Node {
        Shape shape{};
        std::vector<T> data;
        std::vector<T> grad;  // allocated lazily, same extent as data
        bool requires_grad = false;
        bool consumed = false;  // backward already ran through this node
        std::vector<std::shared_ptr<Node>> parents;
        std::function<void(Node&)> backward_fn;  // reads this->grad, accumulates into parents
    };

  public:
    Tensor() = default;

    explicit Tensor(Shape s, bool requires_grad = false) : node_(std::make_shared<Node>()) {
        if (s.numel() <= 0) throw std::invalid_argument("Tensor: degenerate shape " + s.str());
        node_->shape = s;
        node_->data.assign(static_cast<std::size_t>(s.numel()), T(0));
        node_->requires_grad = requires_grad;
    }

    static Tensor zeros(Shape s) { return Tensor(s); }

    static Tensor full(Shape s, T value) {
        Tensor t(s);
        std::fill(t.data().begin(), t.data().end(), value);
        return t;
    }

    static Tensor from(Shape s, std::vector<T> values) {
        Tensor t(s);
        if (static_cast<std::int64_t>(values.size()) != s.numel())
            throw std::invalid_argument("Tensor::from: " + std::to_string(values.size()) +
                                        " values for shape " + s.str());
        t.node_->data = std::move(values);
        return t;
    }

    static Tensor scalar(T value) { return full(Shape{1, 1, 1, 1}, value); }

    // Fan-in-scaled uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    template <typename Rng>
    static Tensor uniform(Shape s, std::int64_t fan_in, Rng& rng, bool requires_grad = true) {
        Tensor t(s, requires_grad);
        const T bound = T(1) / std::sqrt(static_cast<T>(std::max<std::int64_t>(fan_in, 1)));
        std::uniform_real_distribution<double> dist(-double(bound), double(bound));
        for (auto& v : t.node_->data) v = static_cast<T>(dist(rng));
        return t;
    }

    bool defined() const { return static_cast<bool>(node_); }
    const Shape& shape() const { return check()->shape; }
    std::int64_t numel() const { return check()->shape.numel(); }

    std::span<T> data() { return {check()->data.data(), check()->data.size()}; }
    std::span<const T> data() const { return {check()->data.data(), check()->data.size()}; }

    bool requires_grad() const { return check()->requires_grad; }
    void set_requires_grad(bool v) { check()->requires_grad = v; }

    bool has_grad() const { return !check()->grad.empty(); }

    std::span<T> grad() {
        ensure_grad();
        return {node_->grad.data(), node_->grad.size()};
    }
    std::span<const T> grad() const {
        if (check()->grad.empty()) throw std::logic_error("Tensor::grad: no gradient present");
        return {node_->grad.data(), node_->grad.size()};
    }

    void zero_grad() {
        if (!check()->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
    }

    T& at(std::int64_t b, std::int64_t h, std::int64_t w, std::int64_t c) {
        return check()->data[static_cast<std::size_t>(flat_index(node_->shape, b, h, w, c))];
    }
    T at(std::int64_t b, std::int64_t h, std::int64_t w, std::int64_t c) const {
        return check()->data[static_cast<std::size_t>(flat_index(node_->shape, b, h, w, c))];
    }

    T item() const {
        if (numel() != 1) throw std::logic_error("Tensor::item: tensor is not scalar");
        return check()->data[0];
    }

    bool has_graph() const { return static_cast<bool>(check()->backward_fn); }

    // Reverse-mode sweep from a scalar. Populates grad on every tracked
    // tensor reachable from this one, then releases the graph; a second
    // backward without a fresh forward is an error.
    void backward() {
        Node* root = check().get();
        if (root->shape.numel() != 1)
            throw std::logic_error("backward: loss must be scalar, got " + root->shape.str());
        if (root->consumed)
            throw std::logic_error("backward: graph already consumed; run forward again");
        if (!root->backward_fn && !root->requires_grad)
            throw std::logic_error("backward: no graph attached to this tensor");

        std::vector<Node*> order;
        std::unordered_set<Node*> seen;
        topo(root, seen, order);

        root->consumed = true;
        ensure_grad_node(*root);
        root->grad[0] = T(1);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            Node* n = *it;
            if (n->backward_fn) n->backward_fn(*n);
            // release graph edges as we pass
            n->backward_fn = nullptr;
            n->parents.clear();
        }
    }

    // Detach from any recorded graph (data shared).
    Tensor detached() const {
        Tensor t;
        t.node_ = std::make_shared<Node>();
        t.node_->shape = check()->shape;
        t.node_->data = node_->data;
        return t;
    }

    // --- op-author surface ---
    struct NodeAccess {
        static void ensure_grad(Node& n) { ensure_grad_node(n); }
        static std::vector<T>& grad_of(Node& n) { return n.grad; }
        static std::vector<T>& data_of(Node& n) { return n.data; }
    };

    static Tensor make_result(Shape s, std::vector<T> data,
                              std::vector<Tensor> parents,
                              std::function<void(Node&)> backward_fn) {
        Tensor out;
        out.node_ = std::make_shared<Node>();
        out.node_->shape = s;
        out.node_->data = std::move(data);
        bool track = grad_enabled();
        if (track) {
            bool any = false;
            for (const auto& p : parents)
                if (p.defined() && (p.requires_grad() || p.has_graph())) any = true;
            track = any;
        }
        if (track) {
            for (auto& p : parents) out.node_->parents.push_back(p.node_);
            out.node_->backward_fn = std::move(backward_fn);
        }
        return out;
    }

    std::shared_ptr<Node> node() const { return node_; }

    static bool& grad_enabled() {
        thread_local bool enabled = true;
        return enabled;
    }

  private:
    std::shared_ptr<Node> node_;

    const std::shared_ptr<Node>& check() const {
        if (!node_) throw std::logic_error("Tensor: use of undefined tensor");
        return node_;
    }

    void ensure_grad() { ensure_grad_node(*check()); }

    static void ensure_grad_node(Node& n) {
        if (n.grad.empty()) n.grad.assign(n.data.size(), T(0));
    }

    static void topo(Node* n, std::unordered_set<Node*>& seen, std::vector<Node*>& order) {
        if (seen.count(n)) return;
        seen.insert(n);
        for (auto& p : n->parents) topo(p.get(), seen, order);
        order.push_back(n);
    }
};

// Scoped inference mode: ops run inside do not record graphs.
template <typename T>
struct NoGradGuard {
    NoGradGuard() : prev_(Tensor<T>::grad_enabled()) { Tensor<T>::grad_enabled() = false; }
    ~NoGradGuard() { Tensor<T>::grad_enabled() = prev_; }

  private:
    bool prev_;
};

}  // namespace nrx
