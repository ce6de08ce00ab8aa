#include "lanercnn/ops.hpp"

#include <algorithm>
#include <cmath>

#include "lanercnn/kernels.hpp"

namespace lanercnn::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
    throw RuntimeFailure(std::string(op) + ": incompatible shapes " +
                         shape_str(a) + " and " + shape_str(b));
}

void require(bool cond, const char* op, const Shape& a, const Shape& b) {
    if (!cond) shape_error(op, a, b);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(0), "matmul",
            a.shape(), b.shape());
    const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<double> out(static_cast<size_t>(m * n));
    kernels::matmul(a.data(), b.data(), out.data(), m, k, n);
    auto an = a.node(), bn = b.node();
    return make_op({m, n}, std::move(out), {a, b}, [an, bn, m, k, n](Node& o) {
        if (an->requires_grad) {
            an->ensure_grad();
            kernels::matmul_nt_acc(o.grad.data(), bn->value.data(),
                                   an->grad.data(), m, n, k);
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            kernels::matmul_tn_acc(an->value.data(), o.grad.data(),
                                   bn->grad.data(), k, m, n);
        }
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require(a.shape() == b.shape(), "add", a.shape(), b.shape());
    std::vector<double> out(a.values());
    const double* bv = b.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    auto an = a.node(), bn = b.node();
    return make_op(a.shape(), std::move(out), {a, b}, [an, bn](Node& o) {
        for (auto* p : {an.get(), bn.get()}) {
            if (!p->requires_grad) continue;
            p->ensure_grad();
            for (size_t i = 0; i < o.grad.size(); ++i) p->grad[i] += o.grad[i];
        }
    });
}

Tensor add_n(const std::vector<Tensor>& xs) {
    if (xs.empty()) throw RuntimeFailure("add_n: empty input list");
    for (const auto& x : xs)
        require(x.shape() == xs[0].shape(), "add_n", xs[0].shape(), x.shape());
    std::vector<double> out(xs[0].values());
    for (size_t t = 1; t < xs.size(); ++t) {
        const double* xv = xs[t].data();
        for (size_t i = 0; i < out.size(); ++i) out[i] += xv[i];
    }
    std::vector<std::shared_ptr<Node>> nodes;
    nodes.reserve(xs.size());
    for (const auto& x : xs) nodes.push_back(x.node());
    return make_op(xs[0].shape(), std::move(out), xs, [nodes](Node& o) {
        for (auto& p : nodes) {
            if (!p->requires_grad) continue;
            p->ensure_grad();
            for (size_t i = 0; i < o.grad.size(); ++i) p->grad[i] += o.grad[i];
        }
    });
}

Tensor add_rowvec(const Tensor& m, const Tensor& v) {
    require(m.rank() == 2 && v.rank() == 2 && v.dim(0) == 1 &&
                v.dim(1) == m.dim(1),
            "add_rowvec", m.shape(), v.shape());
    const int64_t rows = m.dim(0), cols = m.dim(1);
    std::vector<double> out(m.values());
    const double* vv = v.data();
    for (int64_t r = 0; r < rows; ++r)
        for (int64_t c = 0; c < cols; ++c) out[static_cast<size_t>(r * cols + c)] += vv[c];
    auto mn = m.node(), vn = v.node();
    return make_op(m.shape(), std::move(out), {m, v}, [mn, vn, rows, cols](Node& o) {
        if (mn->requires_grad) {
            mn->ensure_grad();
            for (size_t i = 0; i < o.grad.size(); ++i) mn->grad[i] += o.grad[i];
        }
        if (vn->requires_grad) {
            vn->ensure_grad();
            for (int64_t r = 0; r < rows; ++r)
                for (int64_t c = 0; c < cols; ++c)
                    vn->grad[static_cast<size_t>(c)] +=
                        o.grad[static_cast<size_t>(r * cols + c)];
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require(a.shape() == b.shape(), "sub", a.shape(), b.shape());
    std::vector<double> out(a.values());
    const double* bv = b.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
    auto an = a.node(), bn = b.node();
    return make_op(a.shape(), std::move(out), {a, b}, [an, bn](Node& o) {
        if (an->requires_grad) {
            an->ensure_grad();
            for (size_t i = 0; i < o.grad.size(); ++i) an->grad[i] += o.grad[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (size_t i = 0; i < o.grad.size(); ++i) bn->grad[i] -= o.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require(a.shape() == b.shape(), "mul", a.shape(), b.shape());
    std::vector<double> out(a.values());
    const double* bv = b.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
    auto an = a.node(), bn = b.node();
    return make_op(a.shape(), std::move(out), {a, b}, [an, bn](Node& o) {
        if (an->requires_grad) {
            an->ensure_grad();
            for (size_t i = 0; i < o.grad.size(); ++i)
                an->grad[i] += o.grad[i] * bn->value[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (size_t i = 0; i < o.grad.size(); ++i)
                bn->grad[i] += o.grad[i] * an->value[i];
        }
    });
}

Tensor scale(const Tensor& a, double c) {
    std::vector<double> out(a.values());
    for (double& v : out) v *= c;
    auto an = a.node();
    return make_op(a.shape(), std::move(out), {a}, [an, c](Node& o) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (size_t i = 0; i < o.grad.size(); ++i) an->grad[i] += c * o.grad[i];
    });
}

Tensor concat(const std::vector<Tensor>& xs, int axis) {
    if (xs.empty()) throw RuntimeFailure("concat: empty input list");
    if (axis != 0 && axis != 1) throw RuntimeFailure("concat: axis must be 0 or 1");
    for (const auto& x : xs)
        if (x.rank() != 2) shape_error("concat", xs[0].shape(), x.shape());

    std::vector<std::shared_ptr<Node>> nodes;
    for (const auto& x : xs) nodes.push_back(x.node());

    if (axis == 0) {
        const int64_t cols = xs[0].dim(1);
        int64_t rows = 0;
        for (const auto& x : xs) {
            require(x.dim(1) == cols, "concat", xs[0].shape(), x.shape());
            rows += x.dim(0);
        }
        std::vector<double> out;
        out.reserve(static_cast<size_t>(rows * cols));
        for (const auto& x : xs)
            out.insert(out.end(), x.values().begin(), x.values().end());
        return make_op({rows, cols}, std::move(out), xs, [nodes](Node& o) {
            size_t off = 0;
            for (auto& p : nodes) {
                size_t sz = p->value.size();
                if (p->requires_grad) {
                    p->ensure_grad();
                    for (size_t i = 0; i < sz; ++i) p->grad[i] += o.grad[off + i];
                }
                off += sz;
            }
        });
    }

    const int64_t rows = xs[0].dim(0);
    int64_t cols = 0;
    for (const auto& x : xs) {
        require(x.dim(0) == rows, "concat", xs[0].shape(), x.shape());
        cols += x.dim(1);
    }
    std::vector<double> out(static_cast<size_t>(rows * cols));
    int64_t coff = 0;
    for (const auto& x : xs) {
        const int64_t xc = x.dim(1);
        for (int64_t r = 0; r < rows; ++r)
            std::copy_n(x.data() + r * xc, xc, out.data() + r * cols + coff);
        coff += xc;
    }
    return make_op({rows, cols}, std::move(out), xs, [nodes, rows, cols](Node& o) {
        int64_t off = 0;
        for (auto& p : nodes) {
            const int64_t xc = p->shape[1];
            if (p->requires_grad) {
                p->ensure_grad();
                for (int64_t r = 0; r < rows; ++r)
                    for (int64_t c = 0; c < xc; ++c)
                        p->grad[static_cast<size_t>(r * xc + c)] +=
                            o.grad[static_cast<size_t>(r * cols + off + c)];
            }
            off += xc;
        }
    });
}

namespace {
int64_t row_width(const Tensor& x) { return x.rank() == 1 ? 1 : x.dim(1); }
}  // namespace

Tensor gather_rows(const Tensor& x, std::vector<int> idx) {
    if (x.rank() != 1 && x.rank() != 2)
        throw RuntimeFailure("gather_rows: rank must be 1 or 2, got " +
                             shape_str(x.shape()));
    const int64_t rows = x.dim(0), cols = row_width(x);
    for (int i : idx)
        if (i < 0 || i >= rows)
            throw RuntimeFailure("gather_rows: index " + std::to_string(i) +
                                 " out of range for " + shape_str(x.shape()));
    const int64_t n = static_cast<int64_t>(idx.size());
    std::vector<double> out(static_cast<size_t>(n * cols));
    kernels::gather_rows(x.data(), idx.data(), out.data(), n, cols);
    Shape oshape = x.rank() == 1 ? Shape{n} : Shape{n, cols};
    auto xn = x.node();
    auto ids = std::make_shared<std::vector<int>>(std::move(idx));
    return make_op(std::move(oshape), std::move(out), {x}, [xn, ids, cols](Node& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        kernels::scatter_add_rows(o.grad.data(), ids->data(), xn->grad.data(),
                                  static_cast<int64_t>(ids->size()), cols);
    });
}

Tensor scatter_add_rows(const Tensor& x, std::vector<int> idx, int64_t out_rows) {
    if (x.rank() != 1 && x.rank() != 2)
        throw RuntimeFailure("scatter_add_rows: rank must be 1 or 2, got " +
                             shape_str(x.shape()));
    if (static_cast<int64_t>(idx.size()) != x.dim(0))
        throw RuntimeFailure("scatter_add_rows: index count " +
                             std::to_string(idx.size()) + " != rows of " +
                             shape_str(x.shape()));
    for (int i : idx)
        if (i < 0 || i >= out_rows)
            throw RuntimeFailure("scatter_add_rows: index out of range");
    const int64_t cols = row_width(x);
    std::vector<double> out(static_cast<size_t>(out_rows * cols), 0.0);
    kernels::scatter_add_rows(x.data(), idx.data(), out.data(), x.dim(0), cols);
    Shape oshape = x.rank() == 1 ? Shape{out_rows} : Shape{out_rows, cols};
    auto xn = x.node();
    auto ids = std::make_shared<std::vector<int>>(std::move(idx));
    return make_op(std::move(oshape), std::move(out), {x}, [xn, ids, cols](Node& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        kernels::gather_rows(o.grad.data(), ids->data(), xn->grad.data(),
                             static_cast<int64_t>(ids->size()), cols);
    });
}

Tensor relu(const Tensor& x) {
    std::vector<double> out(x.values().size());
    kernels::relu(x.data(), out.data(), x.size());
    auto xn = x.node();
    return make_op(x.shape(), std::move(out), {x}, [xn](Node& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (size_t i = 0; i < o.grad.size(); ++i)
            if (xn->value[i] > 0.0) xn->grad[i] += o.grad[i];
    });
}

Tensor sigmoid(const Tensor& x) {
    std::vector<double> out(x.values().size());
    for (size_t i = 0; i < out.size(); ++i) {
        double v = x.data()[i];
        out[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                          : std::exp(v) / (1.0 + std::exp(v));
    }
    auto xn = x.node();
    return make_op(x.shape(), std::move(out), {x}, [xn](Node& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (size_t i = 0; i < o.grad.size(); ++i) {
            double s = o.value[i];
            xn->grad[i] += o.grad[i] * s * (1.0 - s);
        }
    });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps) {
    const int64_t cols = x.rank() == 2 ? x.dim(1) : x.dim(0);
    const int64_t rows = x.rank() == 2 ? x.dim(0) : 1;
    require(gamma.size() == cols && beta.size() == cols, "layer_norm",
            x.shape(), gamma.shape());
    std::vector<double> out(x.values().size());
    auto stats_mean = std::make_shared<std::vector<double>>(rows);
    auto stats_rstd = std::make_shared<std::vector<double>>(rows);
    kernels::layer_norm(x.data(), gamma.data(), beta.data(), out.data(),
                        stats_mean->data(), stats_rstd->data(), rows, cols, eps);
    auto xn = x.node(), gn = gamma.node(), bn = beta.node();
    return make_op(
        x.shape(), std::move(out), {x, gamma, beta},
        [xn, gn, bn, stats_mean, stats_rstd, rows, cols](Node& o) {
            for (int64_t r = 0; r < rows; ++r) {
                const double* xr = xn->value.data() + r * cols;
                const double* gr = o.grad.data() + r * cols;
                const double m = (*stats_mean)[static_cast<size_t>(r)];
                const double rs = (*stats_rstd)[static_cast<size_t>(r)];
                if (gn->requires_grad || bn->requires_grad) {
                    if (gn->requires_grad) gn->ensure_grad();
                    if (bn->requires_grad) bn->ensure_grad();
                    for (int64_t c = 0; c < cols; ++c) {
                        double xhat = (xr[c] - m) * rs;
                        if (gn->requires_grad)
                            gn->grad[static_cast<size_t>(c)] += gr[c] * xhat;
                        if (bn->requires_grad)
                            bn->grad[static_cast<size_t>(c)] += gr[c];
                    }
                }
                if (xn->requires_grad) {
                    xn->ensure_grad();
                    // dL/dx = rs/N * (N*g*gamma - sum(g*gamma) - xhat*sum(g*gamma*xhat))
                    double sum_gg = 0.0, sum_ggx = 0.0;
                    for (int64_t c = 0; c < cols; ++c) {
                        double gg = gr[c] * gn->value[static_cast<size_t>(c)];
                        sum_gg += gg;
                        sum_ggx += gg * (xr[c] - m) * rs;
                    }
                    double* dx = xn->grad.data() + r * cols;
                    const double inv_n = 1.0 / static_cast<double>(cols);
                    for (int64_t c = 0; c < cols; ++c) {
                        double gg = gr[c] * gn->value[static_cast<size_t>(c)];
                        double xhat = (xr[c] - m) * rs;
                        dx[c] += rs * (gg - inv_n * sum_gg - inv_n * xhat * sum_ggx);
                    }
                }
            }
        });
}

Tensor smooth_l1(const Tensor& x) {
    std::vector<double> out(x.values().size());
    for (size_t i = 0; i < out.size(); ++i) {
        double v = x.data()[i], a = std::abs(v);
        out[i] = a < 1.0 ? 0.5 * v * v : a - 0.5;
    }
    auto xn = x.node();
    return make_op(x.shape(), std::move(out), {x}, [xn](Node& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (size_t i = 0; i < o.grad.size(); ++i) {
            double v = xn->value[i];
            double d = std::abs(v) < 1.0 ? v : (v > 0.0 ? 1.0 : -1.0);
            xn->grad[i] += o.grad[i] * d;
        }
    });
}

Tensor bce_with_logits(const Tensor& logits, const Tensor& target) {
    require(logits.shape() == target.shape(), "bce_with_logits", logits.shape(),
            target.shape());
    std::vector<double> out(logits.values().size());
    for (size_t i = 0; i < out.size(); ++i) {
        double x = logits.data()[i], t = target.data()[i];
        out[i] = std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
    }
    auto xn = logits.node(), tn = target.node();
    return make_op(logits.shape(), std::move(out), {logits, target},
                   [xn, tn](Node& o) {
                       if (!xn->requires_grad) return;
                       xn->ensure_grad();
                       for (size_t i = 0; i < o.grad.size(); ++i) {
                           double x = xn->value[i];
                           double s = x >= 0.0
                                          ? 1.0 / (1.0 + std::exp(-x))
                                          : std::exp(x) / (1.0 + std::exp(x));
                           xn->grad[i] += o.grad[i] * (s - tn->value[i]);
                       }
                   });
}

Tensor sum(const Tensor& x) {
    double s = 0.0;
    for (double v : x.values()) s += v;
    auto xn = x.node();
    return make_op({1}, {s}, {x}, [xn](Node& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (double& g : xn->grad) g += o.grad[0];
    });
}

Tensor mean(const Tensor& x) {
    if (x.size() == 0) throw RuntimeFailure("mean of empty tensor");
    double s = 0.0;
    for (double v : x.values()) s += v;
    const double inv = 1.0 / static_cast<double>(x.size());
    auto xn = x.node();
    return make_op({1}, {s * inv}, {x}, [xn, inv](Node& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (double& g : xn->grad) g += o.grad[0] * inv;
    });
}

Tensor mean_rows(const Tensor& x) {
    require(x.rank() == 2, "mean_rows", x.shape(), x.shape());
    const int64_t rows = x.dim(0), cols = x.dim(1);
    if (rows == 0) throw RuntimeFailure("mean_rows of empty tensor");
    std::vector<double> out(static_cast<size_t>(cols), 0.0);
    for (int64_t r = 0; r < rows; ++r)
        for (int64_t c = 0; c < cols; ++c)
            out[static_cast<size_t>(c)] += x.at(r, c);
    const double inv = 1.0 / static_cast<double>(rows);
    for (double& v : out) v *= inv;
    auto xn = x.node();
    return make_op({1, cols}, std::move(out), {x}, [xn, rows, cols, inv](Node& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (int64_t r = 0; r < rows; ++r)
            for (int64_t c = 0; c < cols; ++c)
                xn->grad[static_cast<size_t>(r * cols + c)] +=
                    o.grad[static_cast<size_t>(c)] * inv;
    });
}

Tensor reshape(const Tensor& x, Shape new_shape) {
    if (numel(new_shape) != x.size())
        shape_error("reshape", x.shape(), new_shape);
    std::vector<double> out(x.values());
    auto xn = x.node();
    return make_op(std::move(new_shape), std::move(out), {x}, [xn](Node& o) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (size_t i = 0; i < o.grad.size(); ++i) xn->grad[i] += o.grad[i];
    });
}

int64_t conv1d_out_steps(int64_t t, int ksize, int stride) {
    return (t - ksize) / stride + 1;
}

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int ksize,
              int stride) {
    require(x.rank() == 2 && w.rank() == 2, "conv1d", x.shape(), w.shape());
    const int64_t t = x.dim(0), cin = x.dim(1);
    require(w.dim(0) == ksize * cin, "conv1d", x.shape(), w.shape());
    if (t < ksize)
        throw RuntimeFailure("conv1d: input steps " + std::to_string(t) +
                             " shorter than kernel " + std::to_string(ksize));
    const int64_t tout = conv1d_out_steps(t, ksize, stride);
    std::vector<int> idx;
    idx.reserve(static_cast<size_t>(tout * ksize));
    for (int64_t o = 0; o < tout; ++o)
        for (int j = 0; j < ksize; ++j)
            idx.push_back(static_cast<int>(o * stride + j));
    Tensor cols = gather_rows(x, std::move(idx));        // (tout*k, cin)
    Tensor rowed = reshape(cols, {tout, ksize * cin});   // (tout, k*cin)
    return add_rowvec(matmul(rowed, w), b);
}

namespace {

GradCheckReport run_grad_check(
    const std::function<double()>& eval_loss,
    const std::function<void()>& run_backward,
    std::vector<Tensor>& xs, double eps, double tol) {
    run_backward();
    std::vector<std::vector<double>> analytic;
    for (auto& x : xs) analytic.push_back(x.grad());

    const double f0 = eval_loss();
    GradCheckReport rep;
    for (size_t xi = 0; xi < xs.size(); ++xi) {
        Tensor& x = xs[xi];
        for (int64_t i = 0; i < x.size(); ++i) {
            const double saved = x.data()[i];
            x.data()[i] = saved + eps;
            const double fp = eval_loss();
            x.data()[i] = saved - eps;
            const double fm = eval_loss();
            x.data()[i] = saved;
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw RuntimeFailure("grad_check: non-finite finite difference");

            // One-sided derivatives disagree at non-smooth points (a relu
            // kink at exactly 0); those entries are excluded.
            const double fd_p = (fp - f0) / eps;
            const double fd_m = (f0 - fm) / eps;
            if (std::abs(fd_p - fd_m) >
                0.03 * std::max({1.0, std::abs(fd_p), std::abs(fd_m)})) {
                ++rep.excluded;
                continue;
            }
            const double fd = (fp - fm) / (2.0 * eps);
            const double a = analytic[xi][static_cast<size_t>(i)];
            double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-3});
            rep.max_rel_err = std::max(rep.max_rel_err, rel);
            ++rep.checked;
        }
    }
    rep.pass = rep.max_rel_err <= tol && rep.checked > 0;
    return rep;
}

}  // namespace

GradCheckReport grad_check_multi(
    const std::function<Tensor(const std::vector<Tensor>&)>& f,
    std::vector<Tensor>& xs, double eps, double tol) {
    for (auto& x : xs) x.set_requires_grad(true);
    auto eval_loss = [&]() {
        NoGradGuard ng;
        Tensor y = f(xs);
        if (y.size() != 1) throw RuntimeFailure("grad_check: f must be scalar");
        if (!std::isfinite(y.item()))
            throw RuntimeFailure("grad_check: non-finite function value");
        return y.item();
    };
    auto run_backward = [&]() {
        for (auto& x : xs) x.zero_grad();
        Tape tape;
        Tensor y = f(xs);
        if (y.size() != 1) throw RuntimeFailure("grad_check: f must be scalar");
        tape.backward(y);
    };
    return run_grad_check(eval_loss, run_backward, xs, eps, tol);
}

GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f,
                           Tensor& x, double eps, double tol) {
    std::vector<Tensor> xs{x};
    return grad_check_multi(
        [&f](const std::vector<Tensor>& v) { return f(v[0]); }, xs, eps, tol);
}

}  // namespace lanercnn::ad
