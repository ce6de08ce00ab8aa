#include <doctest.h>

#include <cmath>
#include <fstream>

#include "lanercnn/checkpoint.hpp"
#include "lanercnn/kernels.hpp"
#include "lanercnn/ops.hpp"
#include "lanercnn/optim.hpp"

using namespace lanercnn;
using ad::Tensor;

namespace {

Tensor random_tensor(ad::Shape shape, Rng& rng, double scale = 1.0) {
    std::vector<double> data(static_cast<size_t>(ad::numel(shape)));
    for (double& v : data) v = rng.uniform(-scale, scale);
    return Tensor::from(std::move(shape), std::move(data));
}

}  // namespace

TEST_SUITE("autodiff") {

TEST_CASE("parallel kernels match serial reference bitwise") {
    Rng rng(11);
    for (auto [m, k, n] : {std::tuple<int64_t, int64_t, int64_t>{3, 4, 5},
                           {64, 64, 64},
                           {300, 64, 64},
                           {129, 77, 33}}) {
        auto a = random_tensor({m, k}, rng);
        auto b = random_tensor({k, n}, rng);
        std::vector<double> c1(static_cast<size_t>(m * n)), c2 = c1;
        kernels::matmul_serial(a.data(), b.data(), c1.data(), m, k, n);
        kernels::matmul(a.data(), b.data(), c2.data(), m, k, n);
        CHECK(c1 == c2);

        std::vector<double> d1(static_cast<size_t>(m * n), 0.5), d2 = d1;
        auto bt = random_tensor({n, k}, rng);
        kernels::matmul_nt_acc_serial(a.data(), bt.data(), d1.data(), m, k, n);
        kernels::matmul_nt_acc(a.data(), bt.data(), d2.data(), m, k, n);
        CHECK(d1 == d2);

        auto at = random_tensor({k, m}, rng);
        std::vector<double> e1(static_cast<size_t>(m * n), -0.25), e2 = e1;
        kernels::matmul_tn_acc_serial(at.data(), b.data(), e1.data(), m, k, n);
        kernels::matmul_tn_acc(at.data(), b.data(), e2.data(), m, k, n);
        CHECK(e1 == e2);
    }

    auto x = random_tensor({40000}, rng);
    std::vector<double> y1(40000), y2(40000);
    kernels::relu_serial(x.data(), y1.data(), 40000);
    kernels::relu(x.data(), y2.data(), 40000);
    CHECK(y1 == y2);

    auto ln_x = random_tensor({700, 64}, rng);
    auto gamma = random_tensor({64}, rng);
    auto beta = random_tensor({64}, rng);
    std::vector<double> o1(700 * 64), o2(700 * 64), m1(700), m2(700), r1(700), r2(700);
    kernels::layer_norm_serial(ln_x.data(), gamma.data(), beta.data(), o1.data(),
                               m1.data(), r1.data(), 700, 64, 1e-5);
    kernels::layer_norm(ln_x.data(), gamma.data(), beta.data(), o2.data(),
                        m2.data(), r2.data(), 700, 64, 1e-5);
    CHECK(o1 == o2);
}

TEST_CASE("relu forward and backward mask") {
    Tensor x = Tensor::from({3}, {-1.0, 0.0, 2.0}, true);
    ad::Tape tape;
    Tensor y = ad::relu(x);
    CHECK(y.values() == std::vector<double>{0.0, 0.0, 2.0});
    tape.backward(ad::sum(y));
    CHECK(x.grad() == std::vector<double>{0.0, 0.0, 1.0});
}

TEST_CASE("layer_norm of a constant row is zero before affine") {
    Tensor x = Tensor::from({1, 4}, {3.0, 3.0, 3.0, 3.0});
    Tensor gamma = Tensor::full({4}, 1.0);
    Tensor beta = Tensor::zeros({4});
    Tensor y = ad::layer_norm(x, gamma, beta);
    for (double v : y.values()) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("matmul gradient matches finite differences") {
    Rng rng(5);
    Tensor a = random_tensor({2, 3}, rng);
    Tensor b = random_tensor({3, 4}, rng);
    std::vector<Tensor> xs{a, b};
    auto rep = ad::grad_check_multi(
        [](const std::vector<Tensor>& v) {
            return ad::sum(ad::matmul(v[0], v[1]));
        },
        xs);
    CHECK(rep.max_rel_err < 1e-5);
}

TEST_CASE("every differentiable op passes grad_check over random seeds") {
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        const int64_t m = 2 + static_cast<int64_t>(rng.uniform_int(4));
        const int64_t n = 2 + static_cast<int64_t>(rng.uniform_int(4));

        // Composite touching add/sub/mul/scale/concat/gather/scatter/relu/
        // sigmoid/layer_norm/smooth_l1/mean_rows/reshape.
        Tensor x = random_tensor({m, n}, rng);
        std::vector<Tensor> xs{x};
        std::vector<int> idx;
        for (int64_t i = 0; i < m; ++i)
            idx.push_back(static_cast<int>(rng.uniform_int(static_cast<uint64_t>(m))));
        Tensor gamma = random_tensor({2 * n}, rng, 0.5);
        Tensor beta = random_tensor({2 * n}, rng, 0.5);
        auto rep = ad::grad_check_multi(
            [&](const std::vector<Tensor>& v) {
                const Tensor& t = v[0];
                Tensor g = ad::gather_rows(t, idx);
                Tensor s = ad::scatter_add_rows(g, idx, m);
                Tensor c = ad::concat({t, s}, 1);
                Tensor ln = ad::layer_norm(c, gamma, beta);
                Tensor r = ad::relu(ad::scale(ln, 0.7));
                Tensor sg = ad::sigmoid(ad::mean_rows(r));
                Tensor sl = ad::smooth_l1(ad::sub(sg, Tensor::full({1, 2 * n}, 0.3)));
                return ad::add(ad::mean(sl), ad::scale(ad::sum(ad::mul(t, t)), 0.01));
            },
            xs, 1e-6, 1e-5);
        CHECK_MESSAGE(rep.max_rel_err < 1e-5, "seed ", seed, " err ", rep.max_rel_err);

        // bce_with_logits + add_rowvec + matmul chain
        Tensor w = random_tensor({n, 3}, rng);
        Tensor bias = random_tensor({1, 3}, rng, 0.2);
        Tensor target = Tensor::from({m, 3}, [&] {
            std::vector<double> t(static_cast<size_t>(m * 3));
            for (double& v : t) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
            return t;
        }());
        std::vector<Tensor> ys{x, w, bias};
        auto rep2 = ad::grad_check_multi(
            [&](const std::vector<Tensor>& v) {
                Tensor logits = ad::add_rowvec(ad::matmul(v[0], v[1]), v[2]);
                return ad::mean(ad::bce_with_logits(logits, target));
            },
            ys, 1e-6, 1e-5);
        CHECK_MESSAGE(rep2.max_rel_err < 1e-5, "seed ", seed, " err ", rep2.max_rel_err);

        // conv1d over a short sequence
        Tensor seq = random_tensor({7, 4}, rng);
        Tensor cw = random_tensor({12, 5}, rng);
        Tensor cb = random_tensor({1, 5}, rng, 0.1);
        std::vector<Tensor> cs{seq, cw, cb};
        auto rep3 = ad::grad_check_multi(
            [&](const std::vector<Tensor>& v) {
                return ad::mean(ad::conv1d(v[0], v[1], v[2], 3, 2));
            },
            cs, 1e-6, 1e-5);
        CHECK_MESSAGE(rep3.max_rel_err < 1e-5, "seed ", seed, " err ", rep3.max_rel_err);
    }
}

TEST_CASE("grad_check on sum of squares") {
    Tensor x = Tensor::from({2}, {1.0, 2.0});
    auto rep = ad::grad_check([](const Tensor& t) { return ad::sum(ad::mul(t, t)); }, x,
                              1e-6, 1e-8);
    CHECK(rep.pass);
    // analytic gradient is [2, 4]
    ad::Tape tape;
    x.set_requires_grad(true);
    x.zero_grad();
    Tensor y = ad::sum(ad::mul(x, x));
    tape.backward(y);
    CHECK(x.grad()[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(x.grad()[1] == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("grad_check excludes relu kinks at exactly zero") {
    Tensor x = Tensor::from({3}, {1.0, 0.0, -1.0});
    auto rep = ad::grad_check([](const Tensor& t) { return ad::sum(ad::relu(t)); }, x);
    CHECK(rep.excluded >= 1);
    CHECK(rep.max_rel_err < 1e-5);
}

TEST_CASE("gather and scatter_add are mutual adjoints") {
    Rng rng(17);
    Tensor x = random_tensor({6, 3}, rng);
    std::vector<int> idx = {0, 2, 2, 5};
    Tensor u = random_tensor({4, 3}, rng);

    // <gather(x), u> gradient w.r.t. x equals scatter_add(u) exactly.
    x.set_requires_grad(true);
    x.zero_grad();
    {
        ad::Tape tape;
        Tensor inner = ad::sum(ad::mul(ad::gather_rows(x, idx), u));
        tape.backward(inner);
    }
    Tensor scattered = ad::scatter_add_rows(u, idx, 6);
    CHECK(x.grad() == scattered.values());
}

TEST_CASE("forward results do not depend on tape recording") {
    Rng rng(23);
    Tensor a = random_tensor({4, 4}, rng);
    Tensor b = random_tensor({4, 4}, rng);
    auto run = [&] {
        return ad::layer_norm(ad::relu(ad::matmul(a, b)), Tensor::full({4}, 1.0),
                              Tensor::zeros({4}))
            .values();
    };
    std::vector<double> off = run();
    a.set_requires_grad(true);
    std::vector<double> on;
    {
        ad::Tape tape;
        on = run();
    }
    CHECK(off == on);
}

TEST_CASE("backward leaves gradients on every participating leaf") {
    Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4}, true);
    Tensor b = Tensor::from({2, 2}, {0.5, -1, 2, 0.25}, true);
    ad::Tape tape;
    Tensor y = ad::mean(ad::mul(ad::matmul(a, b), a));
    tape.backward(y);
    CHECK(a.has_grad());
    CHECK(b.has_grad());
    double asum = 0, bsum = 0;
    for (double g : a.grad()) asum += std::abs(g);
    for (double g : b.grad()) bsum += std::abs(g);
    CHECK(asum > 0.0);
    CHECK(bsum > 0.0);
}

TEST_CASE("shape mismatches raise errors naming the op") {
    Tensor a = Tensor::zeros({2, 3});
    Tensor b = Tensor::zeros({2, 3});
    CHECK_THROWS_WITH_AS(ad::matmul(a, b),
                         doctest::Contains("matmul"), RuntimeFailure);
    Tensor c = Tensor::zeros({3, 1});
    CHECK_THROWS_AS(ad::add(a, c), RuntimeFailure);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    ParamStore store;
    Rng rng(3);
    Tensor p = store.create("p", {4}, rng, 0.5);
    const std::vector<double> before = p.values();
    store.zero_grads();
    AdamState state = AdamState::init_for(store);
    adam_step(store, state, {});
    CHECK(p.values() == before);
    CHECK(state.step == 1);
}

TEST_CASE("adam: single step matches the hand-evaluated update") {
    ParamStore store;
    Tensor p = store.create_const("p", {1}, 1.0);
    p.grad()[0] = 1.0;
    AdamState state = AdamState::init_for(store);
    AdamConfig cfg;
    cfg.lr = 0.01;
    adam_step(store, state, cfg);
    // m_hat = 1, v_hat = 1 -> update = -lr / (1 + eps)
    CHECK(p.values()[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
}

TEST_CASE("gradient clipping caps the global norm") {
    ParamStore store;
    Tensor p = store.create_const("p", {3}, 0.0);
    p.grad() = {30.0, 40.0, 0.0};  // norm 50
    const double norm = clip_grad_norm(store, 10.0);
    CHECK(norm == doctest::Approx(50.0));
    CHECK(p.grad()[0] == doctest::Approx(6.0));
    CHECK(p.grad()[1] == doctest::Approx(8.0));
}

TEST_CASE("checkpoint container round trip and corruption detection") {
    ParamStore store;
    Rng rng(9);
    store.create("alpha.W", {3, 4}, rng, 1.0);
    store.create("beta.b", {4}, rng, 1.0);
    const std::string path = "/tmp/lanercnn_test_ckpt.bin";
    save_checkpoint(path, "{\"v\":1}", store);

    Checkpoint ckpt = read_checkpoint(path);
    CHECK(ckpt.config_json == "{\"v\":1}");
    REQUIRE(ckpt.entries.size() == 2);
    CHECK(ckpt.entries[0].name == "alpha.W");
    CHECK(ckpt.entries[0].data == store.tensors()[0].values());

    ParamStore other;
    Rng rng2(1);
    other.create("alpha.W", {3, 4}, rng2, 1.0);
    other.create("beta.b", {4}, rng2, 1.0);
    load_into_store(ckpt, other);
    CHECK(other.tensors()[0].values() == store.tensors()[0].values());

    // Truncation must surface as a checksum failure.
    {
        std::ifstream in(path, std::ios::binary);
        std::string buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
        buf.resize(buf.size() - 5);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << buf;
    }
    CHECK_THROWS_AS(read_checkpoint(path), ChecksumError);
}

}  // TEST_SUITE
