#pragma once

#include <functional>
#include <span>
#include <vector>

#include "lanercnn/tensor.hpp"

// The differentiable op set. Shapes are checked eagerly and mismatches throw
// with the op name and both shapes. No implicit broadcasting beyond the
// row-vector expansion in add_rowvec.
namespace lanercnn::ad {

Tensor matmul(const Tensor& a, const Tensor& b);  // (m,k)x(k,n) -> (m,n)
Tensor add(const Tensor& a, const Tensor& b);     // same shape
Tensor add_n(const std::vector<Tensor>& xs);      // elementwise sum, same shape
Tensor add_rowvec(const Tensor& m, const Tensor& v);  // (M,C) + (1,C) per row
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& a, double c);

// axis 0 stacks rows, axis 1 widens rows; all inputs 2-D
Tensor concat(const std::vector<Tensor>& xs, int axis);

// Row gather/scatter along axis 0 (elements for 1-D tensors); the two are
// mutual adjoints.
Tensor gather_rows(const Tensor& x, std::vector<int> idx);
Tensor scatter_add_rows(const Tensor& x, std::vector<int> idx, int64_t out_rows);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

// Per-row normalization over the last dimension with learnable affine.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-5);

// Elementwise smooth-L1 of x (delta = 1): 0.5 x^2 for |x|<1 else |x|-0.5.
Tensor smooth_l1(const Tensor& x);

// Elementwise binary cross entropy on logits; target carries no gradient.
Tensor bce_with_logits(const Tensor& logits, const Tensor& target);

Tensor sum(const Tensor& x);   // scalar
Tensor mean(const Tensor& x);  // scalar
Tensor mean_rows(const Tensor& x);  // (M,C) -> (1,C)

Tensor reshape(const Tensor& x, Shape new_shape);

// 1-D convolution over time-major rows, lowered to a gathered matmul:
// x (T, C_in), w (ksize*C_in, C_out), b (1, C_out) -> ((T-k)/stride+1, C_out).
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int ksize,
              int stride);
int64_t conv1d_out_steps(int64_t t, int ksize, int stride);

struct GradCheckReport {
    double max_rel_err = 0.0;
    int64_t checked = 0;
    int64_t excluded = 0;
    bool pass = false;
};

// Central-difference check of d f / d x against the analytic gradient.
// Relative error uses max(|analytic|, |numeric|, 1e-3) as denominator so
// near-zero entries degrade to an absolute comparison. Entries where the
// finite difference is inconsistent across step sizes (a non-smooth point,
// e.g. a relu kink exactly at 0) are excluded and counted.
GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f,
                           Tensor& x, double eps = 1e-6, double tol = 1e-5);

// Same check over several inputs (gradients w.r.t. each checked in turn).
GradCheckReport grad_check_multi(
    const std::function<Tensor(const std::vector<Tensor>&)>& f,
    std::vector<Tensor>& xs, double eps = 1e-6, double tol = 1e-5);

}  // namespace lanercnn::ad
