#include "lanercnn/scene.hpp"

#include <cmath>
#include <fstream>
#include <functional>

#include <json.hpp>

namespace lanercnn {

using ordered_json = nlohmann::ordered_json;

std::optional<Vec2> ActorTrack::heading() const {
    for (size_t i = past.size(); i-- > 1;) {
        Vec2 d = past[i] - past[i - 1];
        if (d.norm() >= 1e-6) return d.normalized();
    }
    return std::nullopt;
}

double ActorTrack::current_speed(double dt) const {
    if (past.size() < 2) return 0.0;
    return (past.back() - past[past.size() - 2]).norm() / dt;
}

const ActorTrack& Scene::agent() const { return actors[static_cast<size_t>(agent_index())]; }

int Scene::agent_index() const {
    int idx = -1;
    for (size_t i = 0; i < actors.size(); ++i) {
        if (actors[i].is_agent) {
            if (idx >= 0) throw SchemaError("scene has multiple agent actors");
            idx = static_cast<int>(i);
        }
    }
    if (idx < 0) throw SchemaError("scene has no agent actor");
    return idx;
}

namespace {

Scene transform_scene(const Scene& scene, const std::function<Vec2(const Vec2&)>& f) {
    Scene out = scene;
    for (auto& a : out.actors) {
        for (auto& p : a.past) p = f(p);
        if (a.future)
            for (auto& p : *a.future) p = f(p);
    }
    for (auto& l : out.lanes)
        for (auto& p : l.polyline) p = f(p);
    return out;
}

}  // namespace

std::pair<Scene, NormalizationFrame> normalize_scene(const Scene& scene) {
    const ActorTrack& agent = scene.agent();
    if (agent.past.size() < 2)
        throw InvalidInputError("agent needs at least 2 past points");
    NormalizationFrame frame;
    frame.origin = agent.current_position();
    if (auto h = agent.heading()) {
        frame.rotation = -h->angle();
    } else {
        frame.rotation = 0.0;
        frame.degenerate_heading = true;
    }
    Scene out = transform_scene(scene, [&](const Vec2& p) { return frame.apply(p); });
    return {std::move(out), frame};
}

Scene rotate_scene(const Scene& scene, double theta) {
    return transform_scene(scene, [&](const Vec2& p) { return rotate(p, theta); });
}

Scene augment_rotation(const Scene& scene, Rng& rng) {
    const double lim = 2.0 * 3.14159265358979323846 / 3.0;
    return rotate_scene(scene, rng.uniform(-lim, lim));
}

void validate_scene(const Scene& scene) {
    scene.agent_index();  // throws unless exactly one agent
    auto check_finite = [&](const Vec2& p) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw SchemaError("scene contains non-finite coordinates");
    };
    for (const auto& a : scene.actors) {
        if (a.past.empty()) throw SchemaError("actor has empty past track");
        for (const auto& p : a.past) check_finite(p);
        if (a.future)
            for (const auto& p : *a.future) check_finite(p);
    }
    for (const auto& l : scene.lanes) {
        if (l.polyline.size() < 2)
            throw SchemaError("lane polyline needs at least 2 points");
        for (const auto& p : l.polyline) check_finite(p);
        for (size_t i = 1; i < l.polyline.size(); ++i)
            if ((l.polyline[i] - l.polyline[i - 1]).norm() < 0.01)
                throw SchemaError("lane polyline has points closer than 1 cm");
    }
}

namespace {

ordered_json points_json(const std::vector<Vec2>& pts) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : pts) arr.push_back(ordered_json::array({p.x, p.y}));
    return arr;
}

std::vector<Vec2> points_from_json(const ordered_json& arr, const char* what) {
    if (!arr.is_array()) throw SchemaError(std::string("expected array for ") + what);
    std::vector<Vec2> pts;
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 2)
            throw SchemaError(std::string("expected [x,y] pairs in ") + what);
        pts.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return pts;
}

const ordered_json& field(const ordered_json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw SchemaError(std::string("missing field ") + name);
    return *it;
}

}  // namespace

std::string scene_to_json(const Scene& scene) {
    ordered_json j;
    j["format_version"] = 1;
    j["scene_id"] = scene.scene_id;
    j["actors"] = ordered_json::array();
    for (const auto& a : scene.actors) {
        ordered_json ja;
        ja["actor_id"] = a.actor_id;
        ja["is_agent"] = a.is_agent;
        ja["past"] = points_json(a.past);
        ja["future"] = a.future ? points_json(*a.future) : ordered_json(nullptr);
        j["actors"].push_back(std::move(ja));
    }
    j["lanes"] = ordered_json::array();
    for (const auto& l : scene.lanes) {
        ordered_json jl;
        jl["lane_id"] = l.lane_id;
        jl["polyline"] = points_json(l.polyline);
        jl["flags"] = {{"is_turn", l.flags.is_turn},
                       {"has_traffic_control", l.flags.has_traffic_control},
                       {"is_intersection", l.flags.is_intersection}};
        j["lanes"].push_back(std::move(jl));
    }
    j["topology"] = ordered_json::array();
    for (const auto& t : scene.topology)
        j["topology"].push_back(ordered_json::array(
            {t.lane_a, t.lane_b, relation_token(t.relation)}));
    return j.dump(2) + "\n";
}

Scene scene_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("scene root must be an object");
    const auto& ver = field(j, "format_version");
    if (!ver.is_number_integer() || ver.get<int>() != 1)
        throw SchemaError("unsupported format_version (expected 1)");

    Scene scene;
    scene.scene_id = field(j, "scene_id").get<std::string>();
    for (const auto& ja : field(j, "actors")) {
        ActorTrack a;
        a.actor_id = field(ja, "actor_id").get<int>();
        a.is_agent = field(ja, "is_agent").get<bool>();
        a.past = points_from_json(field(ja, "past"), "past");
        const auto& fut = field(ja, "future");
        if (!fut.is_null()) a.future = points_from_json(fut, "future");
        scene.actors.push_back(std::move(a));
    }
    for (const auto& jl : field(j, "lanes")) {
        SceneLane l;
        l.lane_id = field(jl, "lane_id").get<int>();
        l.polyline = points_from_json(field(jl, "polyline"), "polyline");
        const auto& fl = field(jl, "flags");
        l.flags.is_turn = field(fl, "is_turn").get<bool>();
        l.flags.has_traffic_control = field(fl, "has_traffic_control").get<bool>();
        l.flags.is_intersection = field(fl, "is_intersection").get<bool>();
        scene.lanes.push_back(std::move(l));
    }
    for (const auto& jt : field(j, "topology")) {
        if (!jt.is_array() || jt.size() != 3)
            throw SchemaError("topology entries must be [lane_a, lane_b, relation]");
        LaneTopologyEntry t;
        t.lane_a = jt[0].get<int>();
        t.lane_b = jt[1].get<int>();
        t.relation = relation_from_token(jt[2].get<std::string>());
        scene.topology.push_back(t);
    }
    validate_scene(scene);
    return scene;
}

Scene read_scene(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInputError("cannot open scene file: " + path);
    std::string text((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
    return scene_from_json(text);
}

void write_scene(const Scene& scene, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw InvalidInputError("cannot open scene file for writing: " + path);
    f << scene_to_json(scene);
    if (!f) throw RuntimeFailure("failed writing scene file: " + path);
}

LaneGraph build_scene_graph(const Scene& scene, double spacing) {
    if (scene.lanes.empty()) throw InvalidInputError("scene has no lanes");
    std::vector<LaneSegment> segments;
    for (const auto& l : scene.lanes) {
        auto segs = sample_segments(l.polyline, spacing, l.lane_id, l.flags);
        segments.insert(segments.end(), segs.begin(), segs.end());
    }
    return build_adjacency(std::move(segments), scene.topology);
}

}  // namespace lanercnn
