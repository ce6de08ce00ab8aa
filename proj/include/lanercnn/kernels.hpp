#pragma once

#include <cstdint>

// Dense kernels behind the tensor ops. Each kernel has a serial reference
// (*_serial) and an OpenMP version that partitions rows across threads while
// keeping the per-element accumulation order identical, so parallel results
// are bitwise equal to the serial ones for any thread count. Tests assert
// the bitwise match; tools/bench_kernels compares throughput.
namespace lanercnn::kernels {

// C[m x n] = A[m x k] * B[k x n]
void matmul_serial(const double* a, const double* b, double* c,
                   int64_t m, int64_t k, int64_t n);
void matmul(const double* a, const double* b, double* c,
            int64_t m, int64_t k, int64_t n);

// C[m x n] += A[m x k] * B[n x k]^T
void matmul_nt_acc_serial(const double* a, const double* b, double* c,
                          int64_t m, int64_t k, int64_t n);
void matmul_nt_acc(const double* a, const double* b, double* c,
                   int64_t m, int64_t k, int64_t n);

// C[m x n] += A[k x m]^T * B[k x n]
void matmul_tn_acc_serial(const double* a, const double* b, double* c,
                          int64_t m, int64_t k, int64_t n);
void matmul_tn_acc(const double* a, const double* b, double* c,
                   int64_t m, int64_t k, int64_t n);

void relu_serial(const double* x, double* y, int64_t n);
void relu(const double* x, double* y, int64_t n);

// y[r,:] = (x[r,:] - mean_r) / sqrt(var_r + eps) * gamma + beta, per row
void layer_norm_serial(const double* x, const double* gamma, const double* beta,
                       double* y, double* mean, double* rstd,
                       int64_t rows, int64_t cols, double eps);
void layer_norm(const double* x, const double* gamma, const double* beta,
                double* y, double* mean, double* rstd,
                int64_t rows, int64_t cols, double eps);

// out[i,:] = x[idx[i],:]
void gather_rows_serial(const double* x, const int* idx, double* out,
                        int64_t n_idx, int64_t cols);
void gather_rows(const double* x, const int* idx, double* out,
                 int64_t n_idx, int64_t cols);

// out[idx[i],:] += x[i,:]  (serial only: writes may collide across i)
void scatter_add_rows(const double* x, const int* idx, double* out,
                      int64_t n_idx, int64_t cols);

}  // namespace lanercnn::kernels
