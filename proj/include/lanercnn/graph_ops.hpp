#pragma once

#include <span>
#include <string>
#include <vector>

#include "lanercnn/lane_graph.hpp"
#include "lanercnn/ops.hpp"
#include "lanercnn/params.hpp"

namespace lanercnn {

// Two-layer perceptron, hidden relu.
struct Mlp {
    ad::Tensor w1, b1, w2, b2;

    static Mlp create(ParamStore& store, const std::string& prefix, int64_t in,
                      int64_t hidden, int64_t out, Rng& rng);
    ad::Tensor apply(const ad::Tensor& x) const;
};

// Node update F <- Psi(F W + sum_{r,n} bool(E^n(r)) F W_{n,r}) with Psi =
// LayerNorm then ReLU; hops whose connectivity matrix has no edges are
// skipped since they contribute zero.
struct LaneConvLayer {
    int channels = 0;
    std::vector<int> hop_set;
    ad::Tensor w;                            // C x C self term
    std::vector<ad::Tensor> w_hop;           // per (relation, hop), row-major
    ad::Tensor ln_gamma, ln_beta;
    bool psi_enabled = true;                 // tests may bypass Psi

    static LaneConvLayer create(ParamStore& store, const std::string& prefix,
                                int channels, const std::vector<int>& hop_set,
                                Rng& rng);
    const ad::Tensor& weight_for(RelationKind r, size_t hop_index) const;
};

// node_subset, when nonempty, restricts which rows are updated; the rest pass
// through unchanged (all rows still act as message sources).
ad::Tensor lane_conv(const LaneConvLayer& layer, const ad::Tensor& f,
                     const LaneGraph& graph,
                     std::span<const int> node_subset = {});

// Learned pooling of a feature at an arbitrary pose from nearby source nodes
// (strictly within `radius` of the query position):
//   f_v = M_b( sum_{k in N} M_a([f_k, delta_vk]) )
// with delta_vk = (relative position in the query frame, sin/cos of relative
// orientation). An empty neighborhood yields M_b(0).
struct LanePoolLayer {
    Mlp m_a;  // C+4 -> C
    Mlp m_b;  // C -> C
    double radius = 2.0;

    static LanePoolLayer create(ParamStore& store, const std::string& prefix,
                                int channels, double radius, Rng& rng);
};

ad::Tensor lane_pool(const LanePoolLayer& layer, const Pose& query,
                     std::span<const Pose> sources, const ad::Tensor& f_src);
ad::Tensor lane_pool(const LanePoolLayer& layer, const Pose& query,
                     const LaneGraph& graph, const ad::Tensor& f_src);

// Pools all queries against one source set in a single batched pass;
// row q of the result is lane_pool(queries[q]).
ad::Tensor lane_pool_batch(const LanePoolLayer& layer,
                           std::span<const Pose> queries,
                           std::span<const Pose> sources,
                           const ad::Tensor& f_src);

std::vector<Pose> graph_poses(const LaneGraph& graph);

struct Conv1dLayer {
    ad::Tensor w, b;
    int ksize = 3;
    int stride = 2;
    ad::Tensor ln_gamma, ln_beta;

    static Conv1dLayer create(ParamStore& store, const std::string& prefix,
                              int64_t cin, int64_t cout, int ksize, int stride,
                              Rng& rng);
    ad::Tensor apply(const ad::Tensor& x) const;  // conv + LN + relu
};

// Two downsampling conv blocks followed by a mean over the remaining steps.
struct TemporalCnn {
    Conv1dLayer c1, c2;

    static TemporalCnn create(ParamStore& store, const std::string& prefix,
                              int channels, Rng& rng);
    ad::Tensor apply(const ad::Tensor& x) const;  // (T, C) -> (1, C)
};

// Graph shortcut: pool a feature at every past-displacement pose, run the
// temporal CNN over the pooled sequence, project, and add the resulting
// vector to every node embedding.
struct ShortcutLayer {
    LanePoolLayer pool;
    TemporalCnn cnn;
    ad::Tensor proj_w, proj_b;

    static ShortcutLayer create(ParamStore& store, const std::string& prefix,
                                int channels, double radius, Rng& rng);
};

ad::Tensor shortcut(const ShortcutLayer& layer, const LaneGraph& graph,
                    const ad::Tensor& f, std::span<const Pose> displacement_poses);

// Past-displacement poses for the shortcut path: midpoint of each consecutive
// pair of past points, heading along the displacement. Zero-length
// displacements reuse the last moving heading (unit x if none exists yet).
std::vector<Pose> displacement_poses(const std::vector<Vec2>& past);

}  // namespace lanercnn
