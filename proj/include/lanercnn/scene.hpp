#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lanercnn/geometry.hpp"
#include "lanercnn/lane_graph.hpp"
#include "lanercnn/util.hpp"

namespace lanercnn {

struct ActorTrack {
    int actor_id = 0;
    std::vector<Vec2> past;  // oldest to newest; back() is the t=0 position
    std::optional<std::vector<Vec2>> future;
    bool is_agent = false;

    Vec2 current_position() const { return past.back(); }

    // Unit heading from the most recent displacement longer than 1e-6 m,
    // scanning backward; nullopt when the whole history is stationary.
    std::optional<Vec2> heading() const;

    // Speed from the last past displacement, m/s.
    double current_speed(double dt) const;
};

struct SceneLane {
    int lane_id = 0;
    std::vector<Vec2> polyline;
    SemanticFlags flags;
};

struct Scene {
    std::string scene_id;
    std::vector<ActorTrack> actors;
    std::vector<SceneLane> lanes;
    std::vector<LaneTopologyEntry> topology;

    const ActorTrack& agent() const;
    int agent_index() const;
};

// Rigid frame mapping scene coordinates into the agent frame:
// apply(p) = R(rotation) * (p - origin).
struct NormalizationFrame {
    Vec2 origin;
    double rotation = 0.0;
    bool degenerate_heading = false;

    Vec2 apply(const Vec2& p) const { return rotate(p - origin, rotation); }
    Vec2 invert(const Vec2& p) const { return rotate(p, -rotation) + origin; }
};

// Maps the agent's t=0 position to the origin and its current heading to +x.
// A fully stationary agent keeps rotation 0 and flags degenerate_heading.
std::pair<Scene, NormalizationFrame> normalize_scene(const Scene& scene);

// Rotates every coordinate about the origin by an angle drawn uniformly from
// (-2pi/3, 2pi/3). Expects a normalized scene.
Scene augment_rotation(const Scene& scene, Rng& rng);
Scene rotate_scene(const Scene& scene, double theta);

// Structural checks shared by the reader and the generator: exactly one
// agent, finite coordinates, polylines with >= 2 points spaced >= 1 cm.
void validate_scene(const Scene& scene);

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);
Scene read_scene(const std::string& path);
void write_scene(const Scene& scene, const std::string& path);

// Samples every lane at `spacing` and assembles the scene lane graph.
LaneGraph build_scene_graph(const Scene& scene, double spacing);

}  // namespace lanercnn
