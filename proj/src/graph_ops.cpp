#include "lanercnn/graph_ops.hpp"

#include <algorithm>
#include <cmath>

namespace lanercnn {

using ad::Tensor;

Mlp Mlp::create(ParamStore& store, const std::string& prefix, int64_t in,
                int64_t hidden, int64_t out, Rng& rng) {
    Mlp m;
    m.w1 = store.create(prefix + ".W1", {in, hidden}, rng, fan_in_bound(in));
    m.b1 = store.create_const(prefix + ".b1", {1, hidden}, 0.0);
    m.w2 = store.create(prefix + ".W2", {hidden, out}, rng, fan_in_bound(hidden));
    m.b2 = store.create_const(prefix + ".b2", {1, out}, 0.0);
    return m;
}

Tensor Mlp::apply(const Tensor& x) const {
    Tensor h = ad::relu(ad::add_rowvec(ad::matmul(x, w1), b1));
    return ad::add_rowvec(ad::matmul(h, w2), b2);
}

LaneConvLayer LaneConvLayer::create(ParamStore& store, const std::string& prefix,
                                    int channels, const std::vector<int>& hop_set,
                                    Rng& rng) {
    LaneConvLayer l;
    l.channels = channels;
    l.hop_set = hop_set;
    const double bound = fan_in_bound(channels);
    l.w = store.create(prefix + ".W", {channels, channels}, rng, bound);
    for (RelationKind r : kAllRelations)
        for (int n : hop_set)
            l.w_hop.push_back(store.create(prefix + ".W_" + relation_token(r) +
                                               "_" + std::to_string(n),
                                           {channels, channels}, rng, bound));
    l.ln_gamma = store.create_const(prefix + ".ln_gamma", {channels}, 1.0);
    l.ln_beta = store.create_const(prefix + ".ln_beta", {channels}, 0.0);
    return l;
}

const Tensor& LaneConvLayer::weight_for(RelationKind r, size_t hop_index) const {
    return w_hop[static_cast<size_t>(r) * hop_set.size() + hop_index];
}

namespace {

// out[p,:] = sum_{q in m.rows[p]} f[q,:], with the transpose replayed in the
// backward pass.
Tensor bool_spmm(const BoolMatrix& m, const Tensor& f) {
    const int64_t rows = m.size;
    const int64_t cols = f.dim(1);
    std::vector<double> out(static_cast<size_t>(rows * cols), 0.0);
    for (int p = 0; p < m.size; ++p) {
        double* op = out.data() + static_cast<int64_t>(p) * cols;
        for (int q : m.rows[static_cast<size_t>(p)]) {
            const double* fq = f.data() + static_cast<int64_t>(q) * cols;
            for (int64_t c = 0; c < cols; ++c) op[c] += fq[c];
        }
    }
    auto fn = f.node();
    auto rows_t = std::make_shared<std::vector<std::vector<int>>>(m.rows_t);
    return ad::make_op({rows, cols}, std::move(out), {f},
                       [fn, rows_t, cols](ad::Node& o) {
                           if (!fn->requires_grad) return;
                           fn->ensure_grad();
                           const int sz = static_cast<int>(rows_t->size());
                           for (int q = 0; q < sz; ++q) {
                               double* gq = fn->grad.data() +
                                            static_cast<int64_t>(q) * cols;
                               for (int p : (*rows_t)[static_cast<size_t>(q)]) {
                                   const double* go = o.grad.data() +
                                                      static_cast<int64_t>(p) * cols;
                                   for (int64_t c = 0; c < cols; ++c) gq[c] += go[c];
                               }
                           }
                       });
}

}  // namespace

Tensor lane_conv(const LaneConvLayer& layer, const Tensor& f,
                 const LaneGraph& graph, std::span<const int> node_subset) {
    if (f.rank() != 2 || f.dim(1) != layer.channels)
        throw RuntimeFailure("lane_conv: feature width " +
                             ad::shape_str(f.shape()) + " != channels " +
                             std::to_string(layer.channels));
    if (f.dim(0) != graph.num_nodes())
        throw RuntimeFailure("lane_conv: feature rows != graph nodes");

    std::vector<Tensor> terms;
    terms.push_back(ad::matmul(f, layer.w));
    for (RelationKind r : kAllRelations) {
        for (size_t hi = 0; hi < layer.hop_set.size(); ++hi) {
            const BoolMatrix& e = multi_hop(graph, r, layer.hop_set[hi]);
            if (!e.has_edges()) continue;
            terms.push_back(ad::matmul(bool_spmm(e, f), layer.weight_for(r, hi)));
        }
    }
    Tensor pre = terms.size() == 1 ? terms[0] : ad::add_n(terms);
    Tensor out = layer.psi_enabled
                     ? ad::relu(ad::layer_norm(pre, layer.ln_gamma, layer.ln_beta))
                     : pre;

    if (node_subset.empty()) return out;
    // Keep rows outside the subset at their input values.
    std::vector<uint8_t> in_subset(static_cast<size_t>(f.dim(0)), 0);
    for (int i : node_subset) in_subset[static_cast<size_t>(i)] = 1;
    std::vector<int> keep_new, keep_old;
    for (int i = 0; i < static_cast<int>(f.dim(0)); ++i)
        (in_subset[static_cast<size_t>(i)] ? keep_new : keep_old).push_back(i);
    Tensor merged = ad::scatter_add_rows(ad::gather_rows(out, keep_new), keep_new,
                                         f.dim(0));
    if (!keep_old.empty())
        merged = ad::add(merged, ad::scatter_add_rows(ad::gather_rows(f, keep_old),
                                                      keep_old, f.dim(0)));
    return merged;
}

LanePoolLayer LanePoolLayer::create(ParamStore& store, const std::string& prefix,
                                    int channels, double radius, Rng& rng) {
    LanePoolLayer l;
    l.m_a = Mlp::create(store, prefix + ".Ma", channels + 4, channels, channels, rng);
    l.m_b = Mlp::create(store, prefix + ".Mb", channels, channels, channels, rng);
    l.radius = radius;
    return l;
}

std::vector<Pose> graph_poses(const LaneGraph& graph) {
    std::vector<Pose> poses;
    poses.reserve(graph.segments.size());
    for (const auto& s : graph.segments) poses.push_back(s.pose());
    return poses;
}

Tensor lane_pool_batch(const LanePoolLayer& layer, std::span<const Pose> queries,
                       std::span<const Pose> sources, const Tensor& f_src) {
    if (f_src.dim(0) != static_cast<int64_t>(sources.size()))
        throw RuntimeFailure("lane_pool: source pose count != feature rows");
    const int64_t q_count = static_cast<int64_t>(queries.size());
    const int64_t channels = f_src.dim(1);
    const double r2 = layer.radius * layer.radius;

    std::vector<int> src_idx, query_of;
    std::vector<double> delta;
    for (int64_t q = 0; q < q_count; ++q) {
        const Pose& pose = queries[static_cast<size_t>(q)];
        for (size_t k = 0; k < sources.size(); ++k) {
            const Pose& sk = sources[k];
            if ((sk.position - pose.position).norm_sq() >= r2) continue;
            src_idx.push_back(static_cast<int>(k));
            query_of.push_back(static_cast<int>(q));
            const Vec2 rel = pose.to_local(sk.position);
            const double dth = sk.direction.angle() - pose.direction.angle();
            delta.insert(delta.end(), {rel.x, rel.y, std::sin(dth), std::cos(dth)});
        }
    }

    Tensor summed;
    if (src_idx.empty()) {
        summed = Tensor::zeros({q_count, channels});
    } else {
        const int64_t pairs = static_cast<int64_t>(src_idx.size());
        Tensor feats = ad::gather_rows(f_src, src_idx);
        Tensor deltas = Tensor::from({pairs, 4}, std::move(delta));
        Tensor pooled = layer.m_a.apply(ad::concat({feats, deltas}, 1));
        summed = ad::scatter_add_rows(pooled, std::move(query_of), q_count);
    }
    return layer.m_b.apply(summed);
}

Tensor lane_pool(const LanePoolLayer& layer, const Pose& query,
                 std::span<const Pose> sources, const Tensor& f_src) {
    return lane_pool_batch(layer, std::span<const Pose>(&query, 1), sources, f_src);
}

Tensor lane_pool(const LanePoolLayer& layer, const Pose& query,
                 const LaneGraph& graph, const Tensor& f_src) {
    auto poses = graph_poses(graph);
    return lane_pool(layer, query, poses, f_src);
}

Conv1dLayer Conv1dLayer::create(ParamStore& store, const std::string& prefix,
                                int64_t cin, int64_t cout, int ksize, int stride,
                                Rng& rng) {
    Conv1dLayer c;
    c.ksize = ksize;
    c.stride = stride;
    c.w = store.create(prefix + ".W", {ksize * cin, cout}, rng,
                       fan_in_bound(ksize * cin));
    c.b = store.create_const(prefix + ".b", {1, cout}, 0.0);
    c.ln_gamma = store.create_const(prefix + ".ln_gamma", {cout}, 1.0);
    c.ln_beta = store.create_const(prefix + ".ln_beta", {cout}, 0.0);
    return c;
}

Tensor Conv1dLayer::apply(const Tensor& x) const {
    return ad::relu(
        ad::layer_norm(ad::conv1d(x, w, b, ksize, stride), ln_gamma, ln_beta));
}

TemporalCnn TemporalCnn::create(ParamStore& store, const std::string& prefix,
                                int channels, Rng& rng) {
    TemporalCnn t;
    t.c1 = Conv1dLayer::create(store, prefix + ".cnn0", channels, channels, 3, 2, rng);
    t.c2 = Conv1dLayer::create(store, prefix + ".cnn1", channels, channels, 3, 2, rng);
    return t;
}

Tensor TemporalCnn::apply(const Tensor& x) const {
    return ad::mean_rows(c2.apply(c1.apply(x)));
}

ShortcutLayer ShortcutLayer::create(ParamStore& store, const std::string& prefix,
                                    int channels, double radius, Rng& rng) {
    ShortcutLayer s;
    s.pool = LanePoolLayer::create(store, prefix + ".pool", channels, radius, rng);
    s.cnn = TemporalCnn::create(store, prefix, channels, rng);
    s.proj_w = store.create(prefix + ".proj.W", {channels, channels}, rng,
                            fan_in_bound(channels));
    s.proj_b = store.create_const(prefix + ".proj.b", {1, channels}, 0.0);
    return s;
}

Tensor shortcut(const ShortcutLayer& layer, const LaneGraph& graph,
                const Tensor& f, std::span<const Pose> poses) {
    if (poses.empty())
        throw RuntimeFailure("shortcut needs at least one displacement pose");
    auto sources = graph_poses(graph);
    Tensor seq = lane_pool_batch(layer.pool, poses, sources, f);  // (L-1, C)
    Tensor pooled = layer.cnn.apply(seq);                         // (1, C)
    Tensor vec = ad::add_rowvec(ad::matmul(pooled, layer.proj_w), layer.proj_b);
    return ad::add_rowvec(f, vec);
}

std::vector<Pose> displacement_poses(const std::vector<Vec2>& past) {
    std::vector<Pose> poses;
    Vec2 dir{1.0, 0.0};
    for (size_t i = 1; i < past.size(); ++i) {
        const Vec2 d = past[i] - past[i - 1];
        if (d.norm() >= 1e-9) dir = d.normalized();
        poses.push_back(Pose{(past[i - 1] + past[i]) * 0.5, dir});
    }
    return poses;
}

}  // namespace lanercnn
