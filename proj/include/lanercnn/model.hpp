#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lanercnn/decode.hpp"
#include "lanercnn/graph_ops.hpp"
#include "lanercnn/laneroi.hpp"
#include "lanercnn/scene.hpp"

namespace lanercnn {

struct LaneRCNNConfig {
    int channels = 64;
    std::vector<int> hop_set = {1, 2, 4, 8, 16, 32};
    int encoder_blocks = 2;       // [convs_per_block lane convs + shortcut] each
    int convs_per_block = 2;
    int interactor_convs = 4;
    double pool_radius = 2.0;     // interactor / shortcut neighborhood (m)
    int num_modes = 6;            // K
    int goal_hidden = 64;
    int past_steps = 20;          // L
    int future_steps = 30;        // T
    double dt = 0.1;
    double segment_spacing = 1.0;
    double roi_buffer = 20.0;     // retrieval buffer (m)
    double clamp_radius = 5.0;    // motion-feature clamp (m)
    double dedup_radius = 2.0;    // goal dedup (m)
    double max_lateral = 10.0;    // Frenet validity band (m)
    int arc_samples = 1024;

    double horizon_seconds() const { return dt * future_steps; }
    RoiConfig roi_config() const;
    std::string to_json() const;  // canonical, embedded in checkpoints
    static LaneRCNNConfig from_json(const std::string& text);
    bool operator==(const LaneRCNNConfig&) const = default;
};

struct GoalPrediction {
    ad::Tensor logits;    // M x 1
    ad::Tensor residues;  // M x 4: dx, dy, sin(dtheta), cos(dtheta)
};

struct ActorForward {
    int actor_index = 0;  // position in scene.actors
    LaneRoI roi;
    GoalPrediction goals;
};

struct SceneForward {
    LaneGraph scene_graph;
    std::vector<ActorForward> actors;
};

struct ModeOutput {
    double score = 0.0;
    std::vector<Vec2> waypoints;
};

class LaneRCNN {
public:
    LaneRCNN(const LaneRCNNConfig& cfg, uint64_t seed);

    const LaneRCNNConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    // Documented closed-form parameter count for the current config; tests
    // assert it equals the registered total.
    int64_t expected_param_count() const;

    LaneRoI build_roi(const LaneGraph& scene_graph, const ActorTrack& actor) const;

    // Encoder stack: input embedding already in roi.f; applies
    // [convs_per_block lane convs + shortcut] x encoder_blocks with weights
    // shared across actors.
    void encode(std::vector<LaneRoI>& rois,
                const std::vector<ActorTrack>& actors) const;

    // Interactor: project all rois onto the scene graph with lane pooling,
    // run interactor_convs lane convs there, distribute back with lane
    // pooling and add to each roi's features.
    void interact(std::vector<LaneRoI>& rois, const LaneGraph& scene_graph) const;

    GoalPrediction predict_goals(const LaneRoI& roi) const;

    // Refine-head residues for one proposal, shape (future_steps, 2).
    ad::Tensor refine_residues(const LaneRoI& roi,
                               const TrajectoryProposal& proposal) const;

    // Full pipeline on a normalized scene: build graph and rois, encode,
    // interact, goal heads.
    SceneForward forward_scene(const Scene& normalized_scene) const;

    // K refined modes for one actor of a forward result, score-ordered.
    std::vector<ModeOutput> decode_actor(const SceneForward& fwd,
                                         const ActorTrack& actor,
                                         const ActorForward& af) const;

    const Mlp& input_mlp() const { return input_mlp_; }
    const Mlp& goal_cls() const { return goal_cls_; }
    const Mlp& goal_reg() const { return goal_reg_; }

    void save(const std::string& path) const;
    static std::unique_ptr<LaneRCNN> load(const std::string& path);
    // Loads parameters into this model; the embedded config must match.
    void load_params(const std::string& path);

private:
    LaneRCNNConfig cfg_;
    ParamStore params_;
    Mlp input_mlp_;
    std::vector<LaneConvLayer> encoder_convs_;
    std::vector<ShortcutLayer> encoder_shortcuts_;
    LanePoolLayer project_pool_;
    std::vector<LaneConvLayer> interactor_convs_;
    LanePoolLayer distribute_pool_;
    Mlp goal_cls_;
    Mlp goal_reg_;
    LanePoolLayer refine_pool_;
    TemporalCnn refine_cnn_;
    Mlp refine_mlp_;
};

// Pads short histories by repeating the oldest point and keeps the newest
// past_steps points, so model inputs always carry fixed-length tracks.
ActorTrack pad_past(const ActorTrack& actor, int past_steps);

// Predictions for the agent of a raw (unnormalized) scene, mapped back into
// the scene frame.
std::vector<ModeOutput> predict_agent(const LaneRCNN& model, const Scene& scene);

}  // namespace lanercnn
