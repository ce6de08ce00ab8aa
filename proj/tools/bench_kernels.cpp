// Compares the serial reference kernels against the OpenMP versions at
// training-shaped sizes and prints throughput plus speedup.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "lanercnn/kernels.hpp"
#include "lanercnn/util.hpp"

using namespace lanercnn;

namespace {

double time_of(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count() / reps;
}

std::vector<double> random_vec(size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

void bench_matmul(int64_t m, int64_t k, int64_t n, int reps, Rng& rng) {
    auto a = random_vec(static_cast<size_t>(m * k), rng);
    auto b = random_vec(static_cast<size_t>(k * n), rng);
    std::vector<double> c(static_cast<size_t>(m * n));
    const double flops = 2.0 * static_cast<double>(m * k * n);
    const double ts = time_of(
        [&] { kernels::matmul_serial(a.data(), b.data(), c.data(), m, k, n); },
        reps);
    const double tp = time_of(
        [&] { kernels::matmul(a.data(), b.data(), c.data(), m, k, n); }, reps);
    std::printf("matmul %4lldx%lldx%-4lld  serial %7.2f GF/s  omp %7.2f GF/s  speedup %.2fx\n",
                static_cast<long long>(m), static_cast<long long>(k),
                static_cast<long long>(n), flops / ts / 1e9, flops / tp / 1e9,
                ts / tp);
}

void bench_layer_norm(int64_t rows, int64_t cols, int reps, Rng& rng) {
    auto x = random_vec(static_cast<size_t>(rows * cols), rng);
    auto gamma = random_vec(static_cast<size_t>(cols), rng);
    auto beta = random_vec(static_cast<size_t>(cols), rng);
    std::vector<double> y(x.size()), mean(static_cast<size_t>(rows)),
        rstd(static_cast<size_t>(rows));
    const double bytes = 2.0 * static_cast<double>(x.size()) * sizeof(double);
    const double ts = time_of(
        [&] {
            kernels::layer_norm_serial(x.data(), gamma.data(), beta.data(),
                                       y.data(), mean.data(), rstd.data(), rows,
                                       cols, 1e-5);
        },
        reps);
    const double tp = time_of(
        [&] {
            kernels::layer_norm(x.data(), gamma.data(), beta.data(), y.data(),
                                mean.data(), rstd.data(), rows, cols, 1e-5);
        },
        reps);
    std::printf("lnorm  %5lldx%-4lld      serial %7.2f GB/s  omp %7.2f GB/s  speedup %.2fx\n",
                static_cast<long long>(rows), static_cast<long long>(cols),
                bytes / ts / 1e9, bytes / tp / 1e9, ts / tp);
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());
    Rng rng(42);
    for (int64_t m : {64, 128, 256, 512, 1024})
        bench_matmul(m, 64, 64, 400, rng);
    bench_matmul(256, 256, 256, 100, rng);
    for (int64_t rows : {256, 4096, 65536})
        bench_layer_norm(rows, 64, 200, rng);
    return 0;
}
