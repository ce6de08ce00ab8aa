#pragma once

#include <vector>

#include "lanercnn/graph_ops.hpp"
#include "lanercnn/lane_graph.hpp"
#include "lanercnn/scene.hpp"

namespace lanercnn {

struct RoiConfig {
    double horizon_seconds = 3.0;  // prediction horizon backing the range D
    double buffer_meters = 20.0;
    double dt = 0.1;
    double clamp_radius = 5.0;  // motion features zeroed beyond this distance
    int past_steps = 20;
};

// Actor-specific subgraph of the scene lane graph plus node embeddings.
struct LaneRoI {
    int actor_id = 0;
    std::vector<int> node_ids;        // global ids, ascending
    std::vector<int> node_to_global;  // local index -> global id (== node_ids)
    LaneGraph local_graph;
    ad::Tensor f;  // M_i x C, filled by the input encoder / model stages
};

// Relevant-node retrieval: (1) nearest segment per past position seeds the
// set, (2) everything reachable over successor or predecessor edges within
// arc length D = v * horizon + buffer joins it (v from the last
// displacement), (3) left/right neighbors of the result are added.
std::vector<int> retrieve_relevant_nodes(const LaneGraph& scene_graph,
                                         const ActorTrack& actor,
                                         const RoiConfig& cfg);

LaneRoI build_lane_roi(const LaneGraph& scene_graph, const ActorTrack& actor,
                       const RoiConfig& cfg);

constexpr int input_feature_dim(int past_steps) {
    return 5 + 3 + 4 * (past_steps - 1);
}

// Raw per-node input features, one row per roi node:
//   geometric  [5]: segment center in the actor frame, sin/cos of the
//                   segment heading relative to the actor, curvature
//   semantic   [3]: the lane flags
//   motion [4(L-1)]: per past displacement, the displacement vector in the
//                   segment frame and sin/cos of its heading relative to the
//                   segment; slots are ordered oldest to newest, zero-padded
//                   on the left for short histories, and the whole block is
//                   zero for nodes farther than clamp_radius from every past
//                   position.
// `scaled` divides positions by 10 m and curvature by 0.1 to keep inputs O(1).
std::vector<double> node_input_features(const LaneRoI& roi,
                                        const ActorTrack& actor,
                                        const RoiConfig& cfg, bool scaled = true);

// Assembles scaled features and projects them through the input MLP.
ad::Tensor encode_inputs(const LaneRoI& roi, const ActorTrack& actor,
                         const Mlp& mlp_in, const RoiConfig& cfg);

}  // namespace lanercnn
