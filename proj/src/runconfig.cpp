#include "lanercnn/runconfig.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace lanercnn {

using ordered_json = nlohmann::ordered_json;

namespace {

void check_keys(const ordered_json& j, const std::set<std::string>& known,
                const std::string& where) {
    for (const auto& [key, _] : j.items())
        if (!known.count(key))
            throw InvalidInputError("unknown config key '" + key + "' in " + where);
}

template <typename T>
void maybe(const ordered_json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string RunConfig::to_json() const {
    ordered_json j;
    j["seed"] = seed;
    ordered_json g;
    g["min_lanes"] = generator.min_lanes;
    g["max_lanes"] = generator.max_lanes;
    g["min_lane_length"] = generator.min_lane_length;
    g["max_lane_length"] = generator.max_lane_length;
    g["min_curvature"] = generator.min_curvature;
    g["max_curvature"] = generator.max_curvature;
    g["min_actors"] = generator.min_actors;
    g["max_actors"] = generator.max_actors;
    g["min_speed"] = generator.min_speed;
    g["max_speed"] = generator.max_speed;
    g["min_accel"] = generator.min_accel;
    g["max_accel"] = generator.max_accel;
    g["lane_change_prob"] = generator.lane_change_prob;
    g["fork_prob"] = generator.fork_prob;
    g["fork_length"] = generator.fork_length;
    g["lane_width"] = generator.lane_width;
    g["polyline_step"] = generator.polyline_step;
    g["past_steps"] = generator.past_steps;
    g["future_steps"] = generator.future_steps;
    g["dt"] = generator.dt;
    j["generator"] = std::move(g);
    j["model"] = ordered_json::parse(model.to_json());
    ordered_json t;
    t["batch_size"] = training.batch_size;
    t["epochs"] = training.epochs;
    t["lr"] = training.lr;
    t["lr_decay_epoch"] = training.lr_decay_epoch;
    t["lr_decay_factor"] = training.lr_decay_factor;
    t["clip_norm"] = training.clip_norm;
    t["augment"] = training.augment;
    t["alpha"] = training.weights.alpha;
    t["beta"] = training.weights.beta;
    j["training"] = std::move(t);
    return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInputError(std::string("malformed config JSON: ") + e.what());
    }
    check_keys(j, {"seed", "generator", "model", "training"}, "config root");

    RunConfig cfg;
    maybe(j, "seed", cfg.seed);
    if (j.contains("generator")) {
        const auto& g = j["generator"];
        check_keys(g,
                   {"min_lanes", "max_lanes", "min_lane_length", "max_lane_length",
                    "min_curvature", "max_curvature", "min_actors", "max_actors",
                    "min_speed", "max_speed", "min_accel", "max_accel",
                    "lane_change_prob", "fork_prob", "fork_length", "lane_width",
                    "polyline_step", "past_steps", "future_steps", "dt"},
                   "generator");
        maybe(g, "min_lanes", cfg.generator.min_lanes);
        maybe(g, "max_lanes", cfg.generator.max_lanes);
        maybe(g, "min_lane_length", cfg.generator.min_lane_length);
        maybe(g, "max_lane_length", cfg.generator.max_lane_length);
        maybe(g, "min_curvature", cfg.generator.min_curvature);
        maybe(g, "max_curvature", cfg.generator.max_curvature);
        maybe(g, "min_actors", cfg.generator.min_actors);
        maybe(g, "max_actors", cfg.generator.max_actors);
        maybe(g, "min_speed", cfg.generator.min_speed);
        maybe(g, "max_speed", cfg.generator.max_speed);
        maybe(g, "min_accel", cfg.generator.min_accel);
        maybe(g, "max_accel", cfg.generator.max_accel);
        maybe(g, "lane_change_prob", cfg.generator.lane_change_prob);
        maybe(g, "fork_prob", cfg.generator.fork_prob);
        maybe(g, "fork_length", cfg.generator.fork_length);
        maybe(g, "lane_width", cfg.generator.lane_width);
        maybe(g, "polyline_step", cfg.generator.polyline_step);
        maybe(g, "past_steps", cfg.generator.past_steps);
        maybe(g, "future_steps", cfg.generator.future_steps);
        maybe(g, "dt", cfg.generator.dt);
    }
    if (j.contains("model")) {
        const auto& m = j["model"];
        check_keys(m,
                   {"channels", "hop_set", "encoder_blocks", "convs_per_block",
                    "interactor_convs", "pool_radius", "num_modes", "goal_hidden",
                    "past_steps", "future_steps", "dt", "segment_spacing",
                    "roi_buffer", "clamp_radius", "dedup_radius", "max_lateral",
                    "arc_samples"},
                   "model");
        maybe(m, "channels", cfg.model.channels);
        maybe(m, "hop_set", cfg.model.hop_set);
        maybe(m, "encoder_blocks", cfg.model.encoder_blocks);
        maybe(m, "convs_per_block", cfg.model.convs_per_block);
        maybe(m, "interactor_convs", cfg.model.interactor_convs);
        maybe(m, "pool_radius", cfg.model.pool_radius);
        maybe(m, "num_modes", cfg.model.num_modes);
        maybe(m, "goal_hidden", cfg.model.goal_hidden);
        maybe(m, "past_steps", cfg.model.past_steps);
        maybe(m, "future_steps", cfg.model.future_steps);
        maybe(m, "dt", cfg.model.dt);
        maybe(m, "segment_spacing", cfg.model.segment_spacing);
        maybe(m, "roi_buffer", cfg.model.roi_buffer);
        maybe(m, "clamp_radius", cfg.model.clamp_radius);
        maybe(m, "dedup_radius", cfg.model.dedup_radius);
        maybe(m, "max_lateral", cfg.model.max_lateral);
        maybe(m, "arc_samples", cfg.model.arc_samples);
    }
    if (j.contains("training")) {
        const auto& t = j["training"];
        check_keys(t,
                   {"batch_size", "epochs", "lr", "lr_decay_epoch",
                    "lr_decay_factor", "clip_norm", "augment", "alpha", "beta"},
                   "training");
        maybe(t, "batch_size", cfg.training.batch_size);
        maybe(t, "epochs", cfg.training.epochs);
        maybe(t, "lr", cfg.training.lr);
        maybe(t, "lr_decay_epoch", cfg.training.lr_decay_epoch);
        maybe(t, "lr_decay_factor", cfg.training.lr_decay_factor);
        maybe(t, "clip_norm", cfg.training.clip_norm);
        maybe(t, "augment", cfg.training.augment);
        maybe(t, "alpha", cfg.training.weights.alpha);
        maybe(t, "beta", cfg.training.weights.beta);
    }
    cfg.training.seed = cfg.seed;
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInputError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
    return from_json(text);
}

}  // namespace lanercnn
