#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "lanercnn/util.hpp"

namespace lanercnn::ad {

using Shape = std::vector<int64_t>;

inline int64_t numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
}

std::string shape_str(const Shape& s);

// One value in the computation graph. Ops allocate a Node per output; the
// backward closure captures shared_ptrs to the parents only, never to the
// node itself.
struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // allocated on demand, same extent as value
    bool requires_grad = false;
    std::function<void(Node&)> backward_fn;  // empty for leaves

    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

// Shared-ownership handle over a Node; copy is cheap and aliases storage.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double v, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> data,
                       bool requires_grad = false);
    static Tensor scalar(double v);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    int64_t dim(size_t i) const { return node_->shape[i]; }
    size_t rank() const { return node_->shape.size(); }
    int64_t size() const { return static_cast<int64_t>(node_->value.size()); }

    double* data() { return node_->value.data(); }
    const double* data() const { return node_->value.data(); }
    std::vector<double>& values() { return node_->value; }
    const std::vector<double>& values() const { return node_->value; }

    double item() const;
    double at(int64_t r, int64_t c) const {
        return node_->value[static_cast<size_t>(r * node_->shape[1] + c)];
    }

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool v) { node_->requires_grad = v; }

    bool has_grad() const { return node_->grad.size() == node_->value.size(); }
    std::vector<double>& grad() {
        node_->ensure_grad();
        return node_->grad;
    }
    const std::vector<double>& grad() const { return node_->grad; }
    void zero_grad() {
        node_->ensure_grad();
        std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
    }

    std::shared_ptr<Node> node() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

// Records op outputs in creation order; backward replays the exact reverse.
// One tape per logical thread of execution (thread_local current pointer);
// constructing a Tape makes it current, destruction restores the previous.
class Tape {
public:
    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* current();

    void record(std::shared_ptr<Node> n) { order_.push_back(std::move(n)); }
    size_t num_recorded() const { return order_.size(); }

    // Seeds d(loss)/d(loss) = 1 and sweeps recorded nodes in reverse order.
    void backward(const Tensor& loss);

private:
    std::vector<std::shared_ptr<Node>> order_;
    Tape* previous_ = nullptr;
};

// Evaluate fn with recording suspended (forward results are identical either
// way; this just skips tape bookkeeping).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();

private:
    bool saved_;
};

// Internal: build an op output node and register it on the current tape when
// any parent requires grad.
Tensor make_op(Shape shape, std::vector<double> value,
               const std::vector<Tensor>& parents,
               std::function<void(Node&)> backward_fn);

}  // namespace lanercnn::ad
