#include "lanercnn/tensor.hpp"

#include <sstream>

namespace lanercnn::ad {

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << "]";
    return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->value.assign(static_cast<size_t>(numel(shape)), 0.0);
    n->shape = std::move(shape);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

Tensor Tensor::full(Shape shape, double v, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->value.assign(static_cast<size_t>(numel(shape)), v);
    n->shape = std::move(shape);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
    if (numel(shape) != static_cast<int64_t>(data.size()))
        throw RuntimeFailure("tensor data length does not match shape " +
                             shape_str(shape));
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(data);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

Tensor Tensor::scalar(double v) { return from({1}, {v}); }

double Tensor::item() const {
    if (node_->value.size() != 1)
        throw RuntimeFailure("item() on tensor of size " +
                             std::to_string(node_->value.size()));
    return node_->value[0];
}

namespace {
thread_local Tape* g_current_tape = nullptr;
thread_local bool g_grad_enabled = true;
}  // namespace

Tape::Tape() : previous_(g_current_tape) { g_current_tape = this; }

Tape::~Tape() { g_current_tape = previous_; }

Tape* Tape::current() { return g_grad_enabled ? g_current_tape : nullptr; }

void Tape::backward(const Tensor& loss) {
    if (loss.size() != 1)
        throw RuntimeFailure("backward requires a scalar loss, got " +
                             shape_str(loss.shape()));
    auto seed = loss.node();
    seed->ensure_grad();
    seed->grad[0] += 1.0;
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
        Node& n = **it;
        if (n.backward_fn && n.requires_grad) n.backward_fn(n);
    }
}

NoGradGuard::NoGradGuard() : saved_(g_grad_enabled) { g_grad_enabled = false; }

NoGradGuard::~NoGradGuard() { g_grad_enabled = saved_; }

Tensor make_op(Shape shape, std::vector<double> value,
               const std::vector<Tensor>& parents,
               std::function<void(Node&)> backward_fn) {
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(value);
    bool needs = false;
    for (const auto& p : parents) needs = needs || p.requires_grad();
    Tape* tape = Tape::current();
    if (needs && tape) {
        n->requires_grad = true;
        n->backward_fn = std::move(backward_fn);
        tape->record(n);
    }
    return Tensor(std::move(n));
}

}  // namespace lanercnn::ad
