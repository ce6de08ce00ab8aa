#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "lanercnn/scene.hpp"
#include "lanercnn/synthetic.hpp"

using namespace lanercnn;

namespace {

Scene two_lane_scene() {
    Scene s;
    s.scene_id = "fixture";
    ActorTrack agent;
    agent.actor_id = 0;
    agent.is_agent = true;
    for (int k = 0; k < 20; ++k) agent.past.emplace_back(5.0 + 0.5 * k, 5.0);
    agent.future = std::vector<Vec2>{};
    for (int k = 1; k <= 30; ++k) agent.future->emplace_back(14.5 + 0.5 * k, 5.0);
    s.actors.push_back(agent);
    ActorTrack other;
    other.actor_id = 1;
    for (int k = 0; k < 20; ++k) other.past.emplace_back(2.0 + 0.4 * k, 8.5);
    s.actors.push_back(other);
    s.lanes.push_back({0, {{0, 5}, {60, 5}}, {}});
    s.lanes.push_back({1, {{0, 8.5}, {60, 8.5}}, {false, true, false}});
    s.topology.push_back({0, 1, RelationKind::LeftNeighbor});
    s.topology.push_back({1, 0, RelationKind::RightNeighbor});
    return s;
}

double max_coord_diff(const Scene& a, const Scene& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.actors.size(); ++i) {
        for (size_t k = 0; k < a.actors[i].past.size(); ++k)
            m = std::max(m, (a.actors[i].past[k] - b.actors[i].past[k]).norm());
        if (a.actors[i].future)
            for (size_t k = 0; k < a.actors[i].future->size(); ++k)
                m = std::max(m, ((*a.actors[i].future)[k] - (*b.actors[i].future)[k]).norm());
    }
    for (size_t i = 0; i < a.lanes.size(); ++i)
        for (size_t k = 0; k < a.lanes[i].polyline.size(); ++k)
            m = std::max(m, (a.lanes[i].polyline[k] - b.lanes[i].polyline[k]).norm());
    return m;
}

}  // namespace

TEST_SUITE("scene_io") {

TEST_CASE("normalize: forward agent maps heading to +x") {
    Scene s = two_lane_scene();
    s.actors[0].past = {{5, 5}, {6, 5}};
    auto [norm, frame] = normalize_scene(s);
    CHECK(frame.origin.x == doctest::Approx(6.0));
    CHECK(frame.origin.y == doctest::Approx(5.0));
    CHECK(frame.rotation == doctest::Approx(0.0));
    CHECK(norm.actors[0].past.back().x == doctest::Approx(0.0));
    CHECK(norm.actors[0].past.back().y == doctest::Approx(0.0));
}

TEST_CASE("normalize: +y heading rotates by -pi/2") {
    Scene s = two_lane_scene();
    s.actors[0].past = {{0, 0}, {0, 1}};
    auto [norm, frame] = normalize_scene(s);
    CHECK(frame.rotation == doctest::Approx(-3.14159265358979323846 / 2));
    // previous point must land behind the agent on the x axis
    CHECK(norm.actors[0].past.front().x == doctest::Approx(-1.0));
    CHECK(std::abs(norm.actors[0].past.front().y) < 1e-12);
}

TEST_CASE("normalize then invert is identity within 1e-9") {
    Scene s = two_lane_scene();
    auto [norm, frame] = normalize_scene(s);
    double worst = 0.0;
    for (size_t i = 0; i < s.actors.size(); ++i)
        for (size_t k = 0; k < s.actors[i].past.size(); ++k)
            worst = std::max(worst, (frame.invert(norm.actors[i].past[k]) -
                                     s.actors[i].past[k]).norm());
    CHECK(worst < 1e-9);
}

TEST_CASE("stationary agent falls back to rotation 0 with a flag") {
    Scene s = two_lane_scene();
    s.actors[0].past.assign(20, Vec2{3, 4});
    auto [norm, frame] = normalize_scene(s);
    CHECK(frame.degenerate_heading);
    CHECK(frame.rotation == 0.0);
    CHECK(norm.actors[0].past.back().x == doctest::Approx(0.0));
}

TEST_CASE("pipeline invariance under global rigid transforms") {
    Scene s = two_lane_scene();
    auto [norm_a, fa] = normalize_scene(s);
    Scene moved = rotate_scene(s, 1.234);
    for (auto& a : moved.actors) {
        for (auto& p : a.past) p += Vec2{-310.0, 42.5};
        if (a.future)
            for (auto& p : *a.future) p += Vec2{-310.0, 42.5};
    }
    for (auto& l : moved.lanes)
        for (auto& p : l.polyline) p += Vec2{-310.0, 42.5};
    auto [norm_b, fb] = normalize_scene(moved);
    CHECK(max_coord_diff(norm_a, norm_b) < 1e-6);
}

TEST_CASE("augmentation: rotation by known angles") {
    Scene s = two_lane_scene();
    auto [norm, frame] = normalize_scene(s);
    Scene same = rotate_scene(norm, 0.0);
    CHECK(max_coord_diff(norm, same) == 0.0);

    Scene quarter = rotate_scene(norm, 3.14159265358979323846 / 2);
    // (1,0) -> (0,1): check on the agent's one-meter-back point
    const Vec2 back = norm.actors[0].past[18];
    const Vec2 rotated = quarter.actors[0].past[18];
    CHECK(rotated.x == doctest::Approx(-back.y).epsilon(1e-12));
    CHECK(rotated.y == doctest::Approx(back.x).epsilon(1e-12));
}

TEST_CASE("augmentation is deterministic per seed and bounded") {
    Scene s = two_lane_scene();
    auto [norm, frame] = normalize_scene(s);
    Rng r1(55), r2(55);
    Scene a = augment_rotation(norm, r1);
    Scene b = augment_rotation(norm, r2);
    CHECK(max_coord_diff(a, b) == 0.0);
}

TEST_CASE("augmentation preserves pairwise distances within 1e-9") {
    Scene s = two_lane_scene();
    auto [norm, frame] = normalize_scene(s);
    Rng rng(9);
    Scene rot = augment_rotation(norm, rng);
    for (size_t i = 1; i < norm.actors[0].past.size(); ++i) {
        const double before =
            (norm.actors[0].past[i] - norm.actors[1].past[i - 1]).norm();
        const double after =
            (rot.actors[0].past[i] - rot.actors[1].past[i - 1]).norm();
        CHECK(std::abs(before - after) < 1e-9);
    }
}

TEST_CASE("scene JSON round trip is lossless enough") {
    Scene s = two_lane_scene();
    const std::string path = "/tmp/lanercnn_scene_roundtrip.json";
    write_scene(s, path);
    Scene back = read_scene(path);
    CHECK(back.scene_id == s.scene_id);
    REQUIRE(back.actors.size() == s.actors.size());
    CHECK(back.actors[0].is_agent);
    CHECK(!back.actors[1].future.has_value());
    CHECK(max_coord_diff(s, back) < 1e-7);
    CHECK(back.lanes[1].flags.has_traffic_control);
    REQUIRE(back.topology.size() == 2);
    CHECK(back.topology[0].relation == RelationKind::LeftNeighbor);
}

TEST_CASE("serialization keeps full double precision") {
    Scene s = two_lane_scene();
    s.actors[0].past[0] = {123.456789123456, -0.000123456789123};
    const std::string text = scene_to_json(s);
    Scene back = scene_from_json(text);
    CHECK(back.actors[0].past[0].x == s.actors[0].past[0].x);
    CHECK(back.actors[0].past[0].y == s.actors[0].past[0].y);
}

TEST_CASE("reader reports typed schema errors") {
    CHECK_THROWS_AS(scene_from_json("{not json"), SchemaError);
    CHECK_THROWS_WITH_AS(
        scene_from_json("{\"format_version\":1,\"scene_id\":\"x\"}"),
        doctest::Contains("missing field actors"), SchemaError);
    CHECK_THROWS_AS(scene_from_json("{\"format_version\":2,\"scene_id\":\"x\","
                                    "\"actors\":[],\"lanes\":[],\"topology\":[]}"),
                    SchemaError);
    // no agent
    CHECK_THROWS_AS(
        scene_from_json("{\"format_version\":1,\"scene_id\":\"x\",\"actors\":"
                        "[{\"actor_id\":0,\"is_agent\":false,\"past\":[[0,0],[1,0]],"
                        "\"future\":null}],\"lanes\":[],\"topology\":[]}"),
        SchemaError);
    CHECK_THROWS_AS(read_scene("/tmp/definitely_missing_scene.json"),
                    InvalidInputError);
}

TEST_CASE("generator: constant speed future spacing is exact at 10 Hz") {
    GeneratorConfig cfg;
    cfg.min_lanes = cfg.max_lanes = 1;
    cfg.min_actors = cfg.max_actors = 1;
    cfg.min_speed = cfg.max_speed = 10.0;
    cfg.min_accel = cfg.max_accel = 0.0;
    cfg.min_curvature = cfg.max_curvature = 0.0;
    cfg.min_lane_length = cfg.max_lane_length = 80.0;
    cfg.lane_change_prob = 0.0;
    cfg.fork_prob = 0.0;
    Rng rng(3);
    Scene s = generate_synthetic_scene(cfg, rng, "const-speed");
    const auto& fut = *s.actors[0].future;
    REQUIRE(fut.size() == 30);
    for (size_t k = 1; k < fut.size(); ++k)
        CHECK((fut[k] - fut[k - 1]).norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("generator is deterministic per seed, byte-identical JSON") {
    GeneratorConfig cfg;
    Rng r1(77), r2(77), r3(78);
    Scene a = generate_synthetic_scene(cfg, r1, "s");
    Scene b = generate_synthetic_scene(cfg, r2, "s");
    Scene c = generate_synthetic_scene(cfg, r3, "s");
    CHECK(scene_to_json(a) == scene_to_json(b));
    CHECK(scene_to_json(a) != scene_to_json(c));
}

TEST_CASE("generator: lane change ends on the adjacent lane center") {
    GeneratorConfig cfg;
    cfg.min_lanes = cfg.max_lanes = 2;
    cfg.min_actors = cfg.max_actors = 1;
    cfg.lane_change_prob = 1.0;
    cfg.fork_prob = 0.0;
    cfg.min_curvature = cfg.max_curvature = 0.0;
    auto dist_to_lane = [](const SceneLane& lane, const Vec2& p) {
        double best = 1e300;
        for (size_t i = 1; i < lane.polyline.size(); ++i) {
            const Vec2 a = lane.polyline[i - 1], b = lane.polyline[i];
            const Vec2 seg = b - a;
            const double t = std::clamp((p - a).dot(seg) / seg.norm_sq(), 0.0, 1.0);
            best = std::min(best, (p - (a + seg * t)).norm());
        }
        return best;
    };
    for (uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        Scene s = generate_synthetic_scene(cfg, rng, "lc");
        REQUIRE(s.lanes.size() == 2);
        // The change starts no earlier than -1.0 s, so the first past point
        // still sits on the start lane; the future must end on the other one.
        const Vec2 first = s.actors[0].past.front();
        const Vec2 final_pos = s.actors[0].future->back();
        const size_t start_lane =
            dist_to_lane(s.lanes[0], first) < dist_to_lane(s.lanes[1], first) ? 0 : 1;
        const size_t target_lane = 1 - start_lane;
        CHECK(dist_to_lane(s.lanes[target_lane], final_pos) < 0.5);
        CHECK(dist_to_lane(s.lanes[start_lane], final_pos) > 1.0);
    }
}

TEST_CASE("generator rejects infeasible specs") {
    GeneratorConfig cfg;
    cfg.min_lanes = cfg.max_lanes = 0;
    Rng rng(1);
    CHECK_THROWS_AS(generate_synthetic_scene(cfg, rng, "bad"), InvalidInputError);
}

TEST_CASE("generated scenes pass read_scene validation") {
    GeneratorConfig cfg;
    for (uint64_t seed = 0; seed < 8; ++seed) {
        Rng rng(seed);
        Scene s = generate_synthetic_scene(cfg, rng, "check");
        const std::string text = scene_to_json(s);
        Scene back = scene_from_json(text);  // validates
        CHECK(back.actors.size() == s.actors.size());
    }
}

}  // TEST_SUITE
