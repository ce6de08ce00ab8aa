#include "lanercnn/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace lanercnn {

namespace {

// Constant-curvature arc anchored at a start pose.
struct Arc {
    Vec2 start;
    double heading0 = 0.0;
    double curvature = 0.0;
    double length = 0.0;

    double heading_at(double s) const { return heading0 + curvature * s; }

    Vec2 point_at(double s) const {
        if (std::abs(curvature) < 1e-9)
            return start + Vec2{std::cos(heading0), std::sin(heading0)} * s;
        const double h = heading_at(s);
        return {start.x + (std::sin(h) - std::sin(heading0)) / curvature,
                start.y - (std::cos(h) - std::cos(heading0)) / curvature};
    }

    Vec2 left_normal_at(double s) const {
        const double h = heading_at(s);
        return {-std::sin(h), std::cos(h)};
    }

    std::vector<Vec2> polyline(double step, double lateral_offset) const {
        const int n = std::max(2, static_cast<int>(std::ceil(length / step)) + 1);
        std::vector<Vec2> pts;
        pts.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double s = length * static_cast<double>(i) / (n - 1);
            pts.push_back(point_at(s) + left_normal_at(s) * lateral_offset);
        }
        return pts;
    }
};

double smoothstep01(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

}  // namespace

Scene generate_synthetic_scene(const GeneratorConfig& cfg, Rng& rng,
                               const std::string& scene_id) {
    if (cfg.min_lanes < 1 || cfg.max_lanes < cfg.min_lanes)
        throw InvalidInputError("generator config needs at least one lane");
    if (cfg.min_actors < 1 || cfg.max_actors < cfg.min_actors)
        throw InvalidInputError("generator config needs at least one actor");

    Scene scene;
    scene.scene_id = scene_id;

    const int n_lanes =
        cfg.min_lanes + static_cast<int>(rng.uniform_int(
                            static_cast<uint64_t>(cfg.max_lanes - cfg.min_lanes + 1)));

    Arc base;
    base.start = {rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0)};
    base.heading0 = rng.uniform(-3.141592653589793, 3.141592653589793);
    base.curvature = rng.uniform(cfg.min_curvature, cfg.max_curvature);
    base.length = rng.uniform(cfg.min_lane_length, cfg.max_lane_length);

    auto lane_offset = [&](int j) {
        return (static_cast<double>(j) - 0.5 * (n_lanes - 1)) * cfg.lane_width;
    };

    for (int j = 0; j < n_lanes; ++j) {
        SceneLane lane;
        lane.lane_id = j;
        lane.polyline = base.polyline(cfg.polyline_step, lane_offset(j));
        lane.flags.has_traffic_control = rng.uniform() < 0.15;
        scene.lanes.push_back(std::move(lane));
    }
    for (int j = 0; j + 1 < n_lanes; ++j) {
        scene.topology.push_back({j, j + 1, RelationKind::LeftNeighbor});
        scene.topology.push_back({j + 1, j, RelationKind::RightNeighbor});
    }

    // Optional two-way fork at the end of one corridor lane.
    int fork_lane = -1;
    std::array<Arc, 2> branches;
    const bool with_fork = rng.uniform() < cfg.fork_prob;
    if (with_fork) {
        fork_lane = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n_lanes)));
        const double off = lane_offset(fork_lane);
        const Vec2 start = base.point_at(base.length) +
                           base.left_normal_at(base.length) * off;
        const double h = base.heading_at(base.length);
        const double split = rng.uniform(0.018, 0.032) * (rng.uniform() < 0.5 ? 1.0 : -1.0);
        for (int b = 0; b < 2; ++b) {
            Arc& arc = branches[static_cast<size_t>(b)];
            arc.start = start;
            arc.heading0 = h;
            arc.curvature = b == 0 ? base.curvature : base.curvature + split;
            arc.length = cfg.fork_length;
            SceneLane lane;
            lane.lane_id = n_lanes + b;
            lane.polyline = arc.polyline(cfg.polyline_step, 0.0);
            lane.flags.is_turn = b == 1;
            lane.flags.is_intersection = true;
            scene.lanes.push_back(std::move(lane));
            scene.topology.push_back({fork_lane, n_lanes + b, RelationKind::Successor});
        }
    }

    const int n_actors =
        cfg.min_actors + static_cast<int>(rng.uniform_int(
                             static_cast<uint64_t>(cfg.max_actors - cfg.min_actors + 1)));

    const double t_past = cfg.dt * (cfg.past_steps - 1);
    const double t_future = cfg.dt * cfg.future_steps;

    for (int ai = 0; ai < n_actors; ++ai) {
        const int lane = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n_lanes)));
        double v = rng.uniform(cfg.min_speed, cfg.max_speed);
        double a = rng.uniform(cfg.min_accel, cfg.max_accel);
        a = std::max(a, -v / (t_future + 0.5));  // stay moving forward

        const bool through_fork = with_fork && lane == fork_lane;
        const int branch = through_fork
                               ? static_cast<int>(rng.uniform_int(2))
                               : 0;
        const double route_len =
            base.length + (through_fork ? cfg.fork_length : 0.0);

        // Keep the whole track on the route, shrinking speed if needed.
        auto disp = [&](double t) { return v * t + 0.5 * a * t * t; };
        double s0_min = 0.5 - disp(-t_past);
        double s0_max = route_len - 0.5 - disp(t_future);
        while (s0_max < s0_min && v > 0.4) {
            v *= 0.6;
            a *= 0.6;
            a = std::max(a, -v / (t_future + 0.5));
            s0_min = 0.5 - disp(-t_past);
            s0_max = route_len - 0.5 - disp(t_future);
        }
        if (s0_max < s0_min) {
            s0_min = route_len * 0.5;
            s0_max = s0_min;
        }
        const double s0 = rng.uniform(s0_min, s0_max);

        // Lane change policy: corridor actors only, toward an existing neighbor.
        bool lane_change = false;
        int target_lane = lane;
        double lc_start = 0.0;
        const double lc_duration = 2.0;
        if (!through_fork && n_lanes > 1 && rng.uniform() < cfg.lane_change_prob) {
            lane_change = true;
            std::vector<int> options;
            if (lane > 0) options.push_back(lane - 1);
            if (lane + 1 < n_lanes) options.push_back(lane + 1);
            target_lane = options[rng.uniform_int(options.size())];
            lc_start = rng.uniform(-1.0, 0.5);
        }

        auto lateral_at = [&](double t) {
            const double from = lane_offset(lane);
            if (!lane_change) return from;
            const double w = smoothstep01((t - lc_start) / lc_duration);
            return from + (lane_offset(target_lane) - from) * w;
        };

        auto position_at = [&](double t) -> Vec2 {
            const double s = std::max(0.0, s0 + disp(t));
            if (s <= base.length || !through_fork)
                return base.point_at(std::min(s, base.length)) +
                       base.left_normal_at(std::min(s, base.length)) * lateral_at(t);
            const Arc& arc = branches[static_cast<size_t>(branch)];
            const double sb = std::min(s - base.length, arc.length);
            return arc.point_at(sb);
        };

        ActorTrack actor;
        actor.actor_id = ai;
        actor.is_agent = ai == 0;
        for (int k = -(cfg.past_steps - 1); k <= 0; ++k)
            actor.past.push_back(position_at(cfg.dt * k));
        std::vector<Vec2> future;
        for (int k = 1; k <= cfg.future_steps; ++k)
            future.push_back(position_at(cfg.dt * k));
        actor.future = std::move(future);
        scene.actors.push_back(std::move(actor));
    }

    validate_scene(scene);
    return scene;
}

}  // namespace lanercnn
