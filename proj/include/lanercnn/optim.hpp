#pragma once

#include <vector>

#include "lanercnn/params.hpp"

namespace lanercnn {

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<std::vector<double>> m;  // first moment, per parameter
    std::vector<std::vector<double>> v;  // second moment, per parameter
    int64_t step = 0;

    static AdamState init_for(const ParamStore& params);
};

// Standard Adam with bias correction, reading gradients accumulated on the
// parameter tensors. Zero gradients leave values unchanged while the moments
// still decay.
void adam_step(ParamStore& params, AdamState& state, const AdamConfig& cfg);

// Scales all gradients so the global L2 norm is at most max_norm; no-op when
// max_norm <= 0 or the norm is already within bounds. Returns the pre-clip norm.
double clip_grad_norm(ParamStore& params, double max_norm);

}  // namespace lanercnn
