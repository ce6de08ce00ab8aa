#include "lanercnn/laneroi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

namespace lanercnn {

namespace {

int nearest_node(const LaneGraph& g, const Vec2& p) {
    int best = -1;
    double best_d = 0.0;
    for (const auto& s : g.segments) {
        double d = (s.center - p).norm_sq();
        if (best < 0 || d < best_d) {
            best = s.id;
            best_d = d;
        }
    }
    return best;
}

// Multi-source Dijkstra over one relation; the cost of stepping onto a
// segment is that segment's length, so distances measure arc length along
// the lanes.
void expand_within(const LaneGraph& g, RelationKind r,
                   const std::vector<int>& seeds, double limit,
                   std::set<int>& out) {
    const BoolMatrix& adj = g.adjacency(r);
    std::vector<double> dist(g.segments.size(),
                             std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (int s : seeds) {
        dist[static_cast<size_t>(s)] = 0.0;
        heap.push({0.0, s});
    }
    while (!heap.empty()) {
        auto [d, p] = heap.top();
        heap.pop();
        if (d > dist[static_cast<size_t>(p)]) continue;
        out.insert(p);
        for (int q : adj.rows[static_cast<size_t>(p)]) {
            double nd = d + g.segments[static_cast<size_t>(q)].length;
            if (nd <= limit && nd < dist[static_cast<size_t>(q)]) {
                dist[static_cast<size_t>(q)] = nd;
                heap.push({nd, q});
            }
        }
    }
}

}  // namespace

std::vector<int> retrieve_relevant_nodes(const LaneGraph& scene_graph,
                                         const ActorTrack& actor,
                                         const RoiConfig& cfg) {
    if (scene_graph.segments.empty())
        throw InvalidInputError("scene graph has no lane segments");
    if (actor.past.size() < 2)
        throw InvalidInputError("actor needs at least 2 past points");

    std::vector<int> seeds;
    for (const auto& p : actor.past) {
        int n = nearest_node(scene_graph, p);
        if (std::find(seeds.begin(), seeds.end(), n) == seeds.end())
            seeds.push_back(n);
    }

    const double v = actor.current_speed(cfg.dt);
    const double range = v * cfg.horizon_seconds + cfg.buffer_meters;

    std::set<int> reach;
    expand_within(scene_graph, RelationKind::Successor, seeds, range, reach);
    expand_within(scene_graph, RelationKind::Predecessor, seeds, range, reach);

    std::set<int> result = reach;
    for (RelationKind r : {RelationKind::LeftNeighbor, RelationKind::RightNeighbor})
        for (int p : reach)
            for (int q : scene_graph.adjacency(r).rows[static_cast<size_t>(p)])
                result.insert(q);

    return {result.begin(), result.end()};
}

LaneRoI build_lane_roi(const LaneGraph& scene_graph, const ActorTrack& actor,
                       const RoiConfig& cfg) {
    LaneRoI roi;
    roi.actor_id = actor.actor_id;
    roi.node_ids = retrieve_relevant_nodes(scene_graph, actor, cfg);
    roi.node_to_global = roi.node_ids;

    const int m = static_cast<int>(roi.node_ids.size());
    std::vector<int> local_of(scene_graph.segments.size(), -1);
    for (int i = 0; i < m; ++i)
        local_of[static_cast<size_t>(roi.node_ids[static_cast<size_t>(i)])] = i;

    std::vector<LaneSegment> segments(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        segments[static_cast<size_t>(i)] =
            scene_graph.segments[static_cast<size_t>(roi.node_ids[static_cast<size_t>(i)])];
        segments[static_cast<size_t>(i)].id = i;
    }

    std::array<BoolMatrix, 4> adj = {BoolMatrix::empty(m), BoolMatrix::empty(m),
                                     BoolMatrix::empty(m), BoolMatrix::empty(m)};
    for (RelationKind r : kAllRelations) {
        const BoolMatrix& global = scene_graph.adjacency(r);
        BoolMatrix& local = adj[static_cast<size_t>(r)];
        for (int gp : roi.node_ids) {
            int lp = local_of[static_cast<size_t>(gp)];
            for (int gq : global.rows[static_cast<size_t>(gp)]) {
                int lq = local_of[static_cast<size_t>(gq)];
                if (lq >= 0) local.add_edge(lp, lq);
            }
        }
        local.finalize();
    }

    roi.local_graph.segments = std::move(segments);
    roi.local_graph.store = std::make_shared<AdjacencyStore>(std::move(adj));
    return roi;
}

std::vector<double> node_input_features(const LaneRoI& roi,
                                        const ActorTrack& actor,
                                        const RoiConfig& cfg, bool scaled) {
    const int m = roi.local_graph.num_nodes();
    const int dim = input_feature_dim(cfg.past_steps);
    const double pos_scale = scaled ? 0.1 : 1.0;
    const double curv_scale = scaled ? 10.0 : 1.0;

    Pose actor_pose;
    actor_pose.position = actor.current_position();
    if (auto h = actor.heading()) actor_pose.direction = *h;
    const double actor_heading = actor_pose.direction.angle();

    // Window of the most recent past_steps points, oldest first.
    const int avail = static_cast<int>(actor.past.size());
    const int used = std::min(avail, cfg.past_steps);
    const int pad = cfg.past_steps - used;
    const Vec2* window = actor.past.data() + (avail - used);

    std::vector<double> feat(static_cast<size_t>(m) * dim, 0.0);
    for (int i = 0; i < m; ++i) {
        const LaneSegment& seg = roi.local_graph.segments[static_cast<size_t>(i)];
        double* row = feat.data() + static_cast<size_t>(i) * dim;

        const Vec2 rel = actor_pose.to_local(seg.center);
        const double dth = seg.direction.angle() - actor_heading;
        row[0] = rel.x * pos_scale;
        row[1] = rel.y * pos_scale;
        row[2] = std::sin(dth);
        row[3] = std::cos(dth);
        row[4] = seg.curvature * curv_scale;
        row[5] = seg.flags.is_turn ? 1.0 : 0.0;
        row[6] = seg.flags.has_traffic_control ? 1.0 : 0.0;
        row[7] = seg.flags.is_intersection ? 1.0 : 0.0;

        double min_d = std::numeric_limits<double>::infinity();
        for (const auto& p : actor.past)
            min_d = std::min(min_d, (seg.center - p).norm());
        if (min_d > cfg.clamp_radius) continue;  // motion block stays zero

        const Pose seg_pose = seg.pose();
        const double seg_heading = seg.direction.angle();
        for (int j = 0; j + 1 < used; ++j) {
            const Vec2 d = window[j + 1] - window[j];
            if (d.norm() < 1e-9) continue;  // stationary slot stays zero
            const Vec2 rel_d = seg_pose.vector_to_local(d);
            const double ddth = d.angle() - seg_heading;
            double* slot = row + 8 + 4 * (pad + j);
            slot[0] = rel_d.x * pos_scale;
            slot[1] = rel_d.y * pos_scale;
            slot[2] = std::sin(ddth);
            slot[3] = std::cos(ddth);
        }
    }
    return feat;
}

ad::Tensor encode_inputs(const LaneRoI& roi, const ActorTrack& actor,
                         const Mlp& mlp_in, const RoiConfig& cfg) {
    if (roi.local_graph.num_nodes() == 0)
        throw RuntimeFailure("encode_inputs on empty roi");
    const int dim = input_feature_dim(cfg.past_steps);
    ad::Tensor raw = ad::Tensor::from({roi.local_graph.num_nodes(), dim},
                                      node_input_features(roi, actor, cfg, true));
    return mlp_in.apply(raw);
}

}  // namespace lanercnn
