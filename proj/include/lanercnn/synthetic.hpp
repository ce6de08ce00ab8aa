#pragma once

#include "lanercnn/scene.hpp"

namespace lanercnn {

// Desk-scale scene generator. Lanes form a corridor of parallel straight or
// arc centerlines, optionally ending in a two-way fork; actors follow lane
// centers with constant-acceleration longitudinal motion, optional lane
// changes, and branch choices drawn from the rng. Futures continue the same
// policy with no noise, so they are predictable from the past plus the map.
struct GeneratorConfig {
    int min_lanes = 2;
    int max_lanes = 3;
    double min_lane_length = 60.0;
    double max_lane_length = 90.0;
    double min_curvature = -0.012;
    double max_curvature = 0.012;
    int min_actors = 1;
    int max_actors = 3;
    double min_speed = 3.0;
    double max_speed = 9.0;
    double min_accel = -0.6;
    double max_accel = 0.6;
    double lane_change_prob = 0.25;
    double fork_prob = 0.5;
    double fork_length = 30.0;
    double lane_width = 3.5;
    double polyline_step = 2.0;
    int past_steps = 20;
    int future_steps = 30;
    double dt = 0.1;
};

Scene generate_synthetic_scene(const GeneratorConfig& cfg, Rng& rng,
                               const std::string& scene_id);

}  // namespace lanercnn
