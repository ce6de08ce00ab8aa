#include "lanercnn/kernels.hpp"

#include <cmath>
#include <cstring>

namespace lanercnn::kernels {

namespace {
// Below this many output elements the OpenMP fork costs more than the loop.
constexpr int64_t kParallelGrain = 16 * 1024;
}  // namespace

void matmul_serial(const double* a, const double* b, double* c,
                   int64_t m, int64_t k, int64_t n) {
    for (int64_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        std::memset(ci, 0, sizeof(double) * static_cast<size_t>(n));
        const double* ai = a + i * k;
        for (int64_t p = 0; p < k; ++p) {
            const double av = ai[p];
            const double* bp = b + p * n;
            for (int64_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

void matmul(const double* a, const double* b, double* c,
            int64_t m, int64_t k, int64_t n) {
    if (m * k * n < kParallelGrain) {
        matmul_serial(a, b, c, m, k, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        std::memset(ci, 0, sizeof(double) * static_cast<size_t>(n));
        const double* ai = a + i * k;
        for (int64_t p = 0; p < k; ++p) {
            const double av = ai[p];
            const double* bp = b + p * n;
            for (int64_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

void matmul_nt_acc_serial(const double* a, const double* b, double* c,
                          int64_t m, int64_t k, int64_t n) {
    for (int64_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (int64_t j = 0; j < n; ++j) {
            const double* bj = b + j * k;
            double acc = 0.0;
            for (int64_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            ci[j] += acc;
        }
    }
}

void matmul_nt_acc(const double* a, const double* b, double* c,
                   int64_t m, int64_t k, int64_t n) {
    if (m * k * n < kParallelGrain) {
        matmul_nt_acc_serial(a, b, c, m, k, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (int64_t j = 0; j < n; ++j) {
            const double* bj = b + j * k;
            double acc = 0.0;
            for (int64_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            ci[j] += acc;
        }
    }
}

void matmul_tn_acc_serial(const double* a, const double* b, double* c,
                          int64_t m, int64_t k, int64_t n) {
    for (int64_t p = 0; p < k; ++p) {
        const double* ap = a + p * m;
        const double* bp = b + p * n;
        for (int64_t i = 0; i < m; ++i) {
            const double av = ap[i];
            double* ci = c + i * n;
            for (int64_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

void matmul_tn_acc(const double* a, const double* b, double* c,
                   int64_t m, int64_t k, int64_t n) {
    if (m * k * n < kParallelGrain) {
        matmul_tn_acc_serial(a, b, c, m, k, n);
        return;
    }
    // Partition output rows; each thread walks all of k for its rows so the
    // accumulation order per element matches the serial loop.
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        for (int64_t p = 0; p < k; ++p) {
            const double av = a[p * m + i];
            const double* bp = b + p * n;
            for (int64_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

void relu_serial(const double* x, double* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu(const double* x, double* y, int64_t n) {
    if (n < kParallelGrain) {
        relu_serial(x, y, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

namespace {
inline void layer_norm_row(const double* xr, const double* gamma,
                           const double* beta, double* yr, double* mean,
                           double* rstd, int64_t r, int64_t cols, double eps) {
    double m = 0.0;
    for (int64_t j = 0; j < cols; ++j) m += xr[j];
    m /= static_cast<double>(cols);
    double v = 0.0;
    for (int64_t j = 0; j < cols; ++j) {
        double d = xr[j] - m;
        v += d * d;
    }
    v /= static_cast<double>(cols);
    double rs = 1.0 / std::sqrt(v + eps);
    mean[r] = m;
    rstd[r] = rs;
    for (int64_t j = 0; j < cols; ++j)
        yr[j] = (xr[j] - m) * rs * gamma[j] + beta[j];
}
}  // namespace

void layer_norm_serial(const double* x, const double* gamma, const double* beta,
                       double* y, double* mean, double* rstd,
                       int64_t rows, int64_t cols, double eps) {
    for (int64_t r = 0; r < rows; ++r)
        layer_norm_row(x + r * cols, gamma, beta, y + r * cols, mean, rstd, r,
                       cols, eps);
}

void layer_norm(const double* x, const double* gamma, const double* beta,
                double* y, double* mean, double* rstd,
                int64_t rows, int64_t cols, double eps) {
    if (rows * cols < kParallelGrain) {
        layer_norm_serial(x, gamma, beta, y, mean, rstd, rows, cols, eps);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < rows; ++r)
        layer_norm_row(x + r * cols, gamma, beta, y + r * cols, mean, rstd, r,
                       cols, eps);
}

void gather_rows_serial(const double* x, const int* idx, double* out,
                        int64_t n_idx, int64_t cols) {
    for (int64_t i = 0; i < n_idx; ++i)
        std::memcpy(out + i * cols, x + static_cast<int64_t>(idx[i]) * cols,
                    sizeof(double) * static_cast<size_t>(cols));
}

void gather_rows(const double* x, const int* idx, double* out,
                 int64_t n_idx, int64_t cols) {
    if (n_idx * cols < kParallelGrain) {
        gather_rows_serial(x, idx, out, n_idx, cols);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n_idx; ++i)
        std::memcpy(out + i * cols, x + static_cast<int64_t>(idx[i]) * cols,
                    sizeof(double) * static_cast<size_t>(cols));
}

void scatter_add_rows(const double* x, const int* idx, double* out,
                      int64_t n_idx, int64_t cols) {
    for (int64_t i = 0; i < n_idx; ++i) {
        double* o = out + static_cast<int64_t>(idx[i]) * cols;
        const double* xi = x + i * cols;
        for (int64_t j = 0; j < cols; ++j) o[j] += xi[j];
    }
}

}  // namespace lanercnn::kernels
