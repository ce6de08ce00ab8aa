#include "lanercnn/optim.hpp"

#include <cmath>

namespace lanercnn {

AdamState AdamState::init_for(const ParamStore& params) {
    AdamState s;
    for (const auto& p : params.tensors()) {
        s.m.emplace_back(p.values().size(), 0.0);
        s.v.emplace_back(p.values().size(), 0.0);
    }
    return s;
}

void adam_step(ParamStore& params, AdamState& state, const AdamConfig& cfg) {
    if (state.m.size() != params.count())
        throw RuntimeFailure("adam state does not match parameter store");
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (size_t t = 0; t < params.count(); ++t) {
        ad::Tensor& p = params.tensors()[t];
        const std::vector<double>& g = p.grad();
        std::vector<double>& m = state.m[t];
        std::vector<double>& v = state.v[t];
        double* w = p.data();
        for (size_t i = 0; i < g.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

double clip_grad_norm(ParamStore& params, double max_norm) {
    double sq = 0.0;
    for (auto& p : params.tensors())
        for (double g : p.grad()) sq += g * g;
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double s = max_norm / norm;
        for (auto& p : params.tensors())
            for (double& g : p.grad()) g *= s;
    }
    return norm;
}

}  // namespace lanercnn
