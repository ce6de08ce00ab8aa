#include "lanercnn/model.hpp"

#include <cmath>

#include <json.hpp>

#include "lanercnn/checkpoint.hpp"

namespace lanercnn {

using ad::Tensor;
using ordered_json = nlohmann::ordered_json;

RoiConfig LaneRCNNConfig::roi_config() const {
    RoiConfig r;
    r.horizon_seconds = horizon_seconds();
    r.buffer_meters = roi_buffer;
    r.dt = dt;
    r.clamp_radius = clamp_radius;
    r.past_steps = past_steps;
    return r;
}

std::string LaneRCNNConfig::to_json() const {
    ordered_json j;
    j["channels"] = channels;
    j["hop_set"] = hop_set;
    j["encoder_blocks"] = encoder_blocks;
    j["convs_per_block"] = convs_per_block;
    j["interactor_convs"] = interactor_convs;
    j["pool_radius"] = pool_radius;
    j["num_modes"] = num_modes;
    j["goal_hidden"] = goal_hidden;
    j["past_steps"] = past_steps;
    j["future_steps"] = future_steps;
    j["dt"] = dt;
    j["segment_spacing"] = segment_spacing;
    j["roi_buffer"] = roi_buffer;
    j["clamp_radius"] = clamp_radius;
    j["dedup_radius"] = dedup_radius;
    j["max_lateral"] = max_lateral;
    j["arc_samples"] = arc_samples;
    return j.dump();
}

LaneRCNNConfig LaneRCNNConfig::from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed model config: ") + e.what());
    }
    LaneRCNNConfig c;
    c.channels = j.at("channels").get<int>();
    c.hop_set = j.at("hop_set").get<std::vector<int>>();
    c.encoder_blocks = j.at("encoder_blocks").get<int>();
    c.convs_per_block = j.at("convs_per_block").get<int>();
    c.interactor_convs = j.at("interactor_convs").get<int>();
    c.pool_radius = j.at("pool_radius").get<double>();
    c.num_modes = j.at("num_modes").get<int>();
    c.goal_hidden = j.at("goal_hidden").get<int>();
    c.past_steps = j.at("past_steps").get<int>();
    c.future_steps = j.at("future_steps").get<int>();
    c.dt = j.at("dt").get<double>();
    c.segment_spacing = j.at("segment_spacing").get<double>();
    c.roi_buffer = j.at("roi_buffer").get<double>();
    c.clamp_radius = j.at("clamp_radius").get<double>();
    c.dedup_radius = j.at("dedup_radius").get<double>();
    c.max_lateral = j.at("max_lateral").get<double>();
    c.arc_samples = j.at("arc_samples").get<int>();
    return c;
}

LaneRCNN::LaneRCNN(const LaneRCNNConfig& cfg, uint64_t seed) : cfg_(cfg) {
    Rng rng(seed);
    const int c = cfg_.channels;
    const int din = input_feature_dim(cfg_.past_steps);

    input_mlp_ = Mlp::create(params_, "input", din, c, c, rng);

    const int enc_convs = cfg_.encoder_blocks * cfg_.convs_per_block;
    for (int i = 0; i < enc_convs; ++i)
        encoder_convs_.push_back(LaneConvLayer::create(
            params_, "encoder.conv" + std::to_string(i), c, cfg_.hop_set, rng));
    for (int i = 0; i < cfg_.encoder_blocks; ++i)
        encoder_shortcuts_.push_back(ShortcutLayer::create(
            params_, "encoder.shortcut" + std::to_string(i), c, cfg_.pool_radius,
            rng));

    project_pool_ = LanePoolLayer::create(params_, "interactor.project", c,
                                          cfg_.pool_radius, rng);
    for (int i = 0; i < cfg_.interactor_convs; ++i)
        interactor_convs_.push_back(LaneConvLayer::create(
            params_, "interactor.conv" + std::to_string(i), c, cfg_.hop_set, rng));
    distribute_pool_ = LanePoolLayer::create(params_, "interactor.distribute", c,
                                             cfg_.pool_radius, rng);

    goal_cls_ = Mlp::create(params_, "goal.cls", c, cfg_.goal_hidden, 1, rng);
    goal_reg_ = Mlp::create(params_, "goal.reg", c, cfg_.goal_hidden, 4, rng);

    refine_pool_ = LanePoolLayer::create(params_, "refine.pool", c,
                                         cfg_.pool_radius, rng);
    refine_cnn_ = TemporalCnn::create(params_, "refine", c, rng);
    refine_mlp_ = Mlp::create(params_, "refine.mlp", c, cfg_.goal_hidden,
                              2 * cfg_.future_steps, rng);

    const int64_t expected = expected_param_count();
    if (params_.total_elements() != expected)
        throw RuntimeFailure("parameter count " +
                             std::to_string(params_.total_elements()) +
                             " != closed-form count " + std::to_string(expected));
}

int64_t LaneRCNN::expected_param_count() const {
    const int64_t c = cfg_.channels;
    const int64_t h = cfg_.goal_hidden;
    const int64_t din = input_feature_dim(cfg_.past_steps);
    const int64_t hops = static_cast<int64_t>(cfg_.hop_set.size());
    const int64_t t2 = 2 * cfg_.future_steps;

    auto mlp = [](int64_t i, int64_t hid, int64_t o) {
        return i * hid + hid + hid * o + o;
    };
    // W + one W_{n,r} per (relation, hop) + LayerNorm affine
    const int64_t conv = c * c + 4 * hops * c * c + 2 * c;
    const int64_t pool = mlp(c + 4, c, c) + mlp(c, c, c);
    const int64_t conv1d = 3 * c * c + c + 2 * c;
    const int64_t cnn = 2 * conv1d;
    const int64_t shortcut_l = pool + cnn + (c * c + c);

    int64_t total = mlp(din, c, c);
    total += cfg_.encoder_blocks * (cfg_.convs_per_block * conv + shortcut_l);
    total += pool + cfg_.interactor_convs * conv + pool;
    total += mlp(c, h, 1) + mlp(c, h, 4);
    total += pool + cnn + mlp(c, h, t2);
    return total;
}

LaneRoI LaneRCNN::build_roi(const LaneGraph& scene_graph,
                            const ActorTrack& actor) const {
    const ActorTrack padded = pad_past(actor, cfg_.past_steps);
    LaneRoI roi = build_lane_roi(scene_graph, padded, cfg_.roi_config());
    roi.f = encode_inputs(roi, padded, input_mlp_, cfg_.roi_config());
    return roi;
}

void LaneRCNN::encode(std::vector<LaneRoI>& rois,
                      const std::vector<ActorTrack>& actors) const {
    for (size_t i = 0; i < rois.size(); ++i) {
        LaneRoI& roi = rois[i];
        const ActorTrack padded = pad_past(actors[i], cfg_.past_steps);
        const auto poses = displacement_poses(padded.past);
        size_t conv_idx = 0;
        for (int b = 0; b < cfg_.encoder_blocks; ++b) {
            for (int k = 0; k < cfg_.convs_per_block; ++k)
                roi.f = lane_conv(encoder_convs_[conv_idx++], roi.f, roi.local_graph);
            roi.f = shortcut(encoder_shortcuts_[static_cast<size_t>(b)],
                             roi.local_graph, roi.f, poses);
        }
    }
}

void LaneRCNN::interact(std::vector<LaneRoI>& rois,
                        const LaneGraph& scene_graph) const {
    // Project: pool global node embeddings from the union of all roi nodes.
    std::vector<Pose> source_poses;
    std::vector<Tensor> source_feats;
    for (const auto& roi : rois) {
        for (const auto& seg : roi.local_graph.segments)
            source_poses.push_back(seg.pose());
        source_feats.push_back(roi.f);
    }
    Tensor f_union = source_feats.size() == 1 ? source_feats[0]
                                              : ad::concat(source_feats, 0);
    const auto global_poses = graph_poses(scene_graph);
    Tensor f_global =
        lane_pool_batch(project_pool_, global_poses, source_poses, f_union);

    for (const auto& layer : interactor_convs_)
        f_global = lane_conv(layer, f_global, scene_graph);

    // Distribute back with a skip connection.
    for (auto& roi : rois) {
        const auto roi_poses = graph_poses(roi.local_graph);
        Tensor pooled =
            lane_pool_batch(distribute_pool_, roi_poses, global_poses, f_global);
        roi.f = ad::add(roi.f, pooled);
    }
}

GoalPrediction LaneRCNN::predict_goals(const LaneRoI& roi) const {
    return {goal_cls_.apply(roi.f), goal_reg_.apply(roi.f)};
}

Tensor LaneRCNN::refine_residues(const LaneRoI& roi,
                                 const TrajectoryProposal& proposal) const {
    const auto poses = proposal_poses(proposal);
    const auto sources = graph_poses(roi.local_graph);
    Tensor seq = lane_pool_batch(refine_pool_, poses, sources, roi.f);  // (T, C)
    Tensor pooled = refine_cnn_.apply(seq);                             // (1, C)
    Tensor flat = refine_mlp_.apply(pooled);                            // (1, 2T)
    return ad::reshape(flat, {cfg_.future_steps, 2});
}

SceneForward LaneRCNN::forward_scene(const Scene& scene) const {
    SceneForward fwd;
    fwd.scene_graph = build_scene_graph(scene, cfg_.segment_spacing);
    std::vector<LaneRoI> rois;
    std::vector<ActorTrack> actors;
    for (size_t i = 0; i < scene.actors.size(); ++i) {
        rois.push_back(build_roi(fwd.scene_graph, scene.actors[i]));
        actors.push_back(scene.actors[i]);
    }
    encode(rois, actors);
    interact(rois, fwd.scene_graph);
    for (size_t i = 0; i < rois.size(); ++i) {
        ActorForward af;
        af.actor_index = static_cast<int>(i);
        af.roi = std::move(rois[i]);
        af.goals = predict_goals(af.roi);
        fwd.actors.push_back(std::move(af));
    }
    return fwd;
}

std::vector<ModeOutput> LaneRCNN::decode_actor(const SceneForward& fwd,
                                               const ActorTrack& actor,
                                               const ActorForward& af) const {
    (void)fwd;
    const ActorTrack padded = pad_past(actor, cfg_.past_steps);
    Pose start;
    start.position = padded.current_position();
    if (auto h = padded.heading()) start.direction = *h;
    const double v = padded.current_speed(cfg_.dt);

    std::vector<Pose> node_poses = graph_poses(af.roi.local_graph);
    const auto goals = select_goals(af.goals.logits.values(),
                                    af.goals.residues.values(), node_poses,
                                    cfg_.num_modes, cfg_.dedup_radius);

    std::vector<ModeOutput> modes;
    for (const auto& goal : goals) {
        ModeOutput mode;
        mode.score = goal.score;
        try {
            BezierCurve curve = fit_bezier(start, goal.pose, cfg_.arc_samples);
            TrajectoryProposal prop =
                rollout(curve, v, cfg_.horizon_seconds(), cfg_.dt);
            prop.score = goal.score;
            prop.goal_node = goal.node;
            Tensor residues = refine_residues(af.roi, prop);
            mode.waypoints = apply_refinement(prop, residues.values());
        } catch (const InvalidInputError&) {
            // Degenerate zero-length proposal: hold the current position.
            mode.waypoints.assign(static_cast<size_t>(cfg_.future_steps),
                                  start.position);
        }
        modes.push_back(std::move(mode));
    }
    return modes;
}

void LaneRCNN::save(const std::string& path) const {
    save_checkpoint(path, cfg_.to_json(), params_);
}

std::unique_ptr<LaneRCNN> LaneRCNN::load(const std::string& path) {
    Checkpoint ckpt = read_checkpoint(path);
    auto model = std::make_unique<LaneRCNN>(
        LaneRCNNConfig::from_json(ckpt.config_json), /*seed=*/0);
    load_into_store(ckpt, model->params_);
    return model;
}

void LaneRCNN::load_params(const std::string& path) {
    Checkpoint ckpt = read_checkpoint(path);
    if (LaneRCNNConfig::from_json(ckpt.config_json) != cfg_)
        throw ConfigMismatchError(
            "checkpoint config does not match the model config");
    load_into_store(ckpt, params_);
}

ActorTrack pad_past(const ActorTrack& actor, int past_steps) {
    ActorTrack out = actor;
    const int n = static_cast<int>(actor.past.size());
    if (n == past_steps) return out;
    out.past.clear();
    if (n > past_steps) {
        out.past.assign(actor.past.end() - past_steps, actor.past.end());
    } else {
        out.past.assign(static_cast<size_t>(past_steps - n), actor.past.front());
        out.past.insert(out.past.end(), actor.past.begin(), actor.past.end());
    }
    return out;
}

std::vector<ModeOutput> predict_agent(const LaneRCNN& model, const Scene& scene) {
    ad::NoGradGuard ng;
    auto [normalized, frame] = normalize_scene(scene);
    SceneForward fwd = model.forward_scene(normalized);
    const int agent = normalized.agent_index();
    auto modes = model.decode_actor(fwd, normalized.actors[static_cast<size_t>(agent)],
                                    fwd.actors[static_cast<size_t>(agent)]);
    for (auto& m : modes)
        for (auto& p : m.waypoints) p = frame.invert(p);
    return modes;
}

}  // namespace lanercnn
