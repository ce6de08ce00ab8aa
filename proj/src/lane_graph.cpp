#include "lanercnn/lane_graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lanercnn {

RelationKind inverse_relation(RelationKind r) {
    switch (r) {
        case RelationKind::Predecessor: return RelationKind::Successor;
        case RelationKind::Successor: return RelationKind::Predecessor;
        case RelationKind::LeftNeighbor: return RelationKind::RightNeighbor;
        case RelationKind::RightNeighbor: return RelationKind::LeftNeighbor;
    }
    throw RuntimeFailure("bad relation kind");
}

const char* relation_token(RelationKind r) {
    switch (r) {
        case RelationKind::Predecessor: return "pre";
        case RelationKind::Successor: return "suc";
        case RelationKind::LeftNeighbor: return "left";
        case RelationKind::RightNeighbor: return "right";
    }
    throw RuntimeFailure("bad relation kind");
}

RelationKind relation_from_token(const std::string& token) {
    for (RelationKind r : kAllRelations)
        if (token == relation_token(r)) return r;
    throw SchemaError("unknown relation token: " + token);
}

BoolMatrix BoolMatrix::empty(int size) {
    BoolMatrix m;
    m.size = size;
    m.rows.resize(static_cast<size_t>(size));
    m.rows_t.resize(static_cast<size_t>(size));
    return m;
}

void BoolMatrix::add_edge(int from, int to) {
    rows[static_cast<size_t>(from)].push_back(to);
}

void BoolMatrix::finalize() {
    for (auto& r : rows) {
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
    }
    rows_t.assign(static_cast<size_t>(size), {});
    for (int p = 0; p < size; ++p)
        for (int q : rows[static_cast<size_t>(p)])
            rows_t[static_cast<size_t>(q)].push_back(p);
    for (auto& r : rows_t) std::sort(r.begin(), r.end());
}

bool BoolMatrix::has_edges() const {
    for (const auto& r : rows)
        if (!r.empty()) return true;
    return false;
}

int64_t BoolMatrix::num_edges() const {
    int64_t n = 0;
    for (const auto& r : rows) n += static_cast<int64_t>(r.size());
    return n;
}

bool BoolMatrix::contains(int from, int to) const {
    const auto& r = rows[static_cast<size_t>(from)];
    return std::binary_search(r.begin(), r.end(), to);
}

BoolMatrix bool_multiply(const BoolMatrix& a, const BoolMatrix& b) {
    if (a.size != b.size)
        throw RuntimeFailure("bool_multiply: size mismatch");
    BoolMatrix out = BoolMatrix::empty(a.size);
    std::vector<int> acc;
    for (int p = 0; p < a.size; ++p) {
        acc.clear();
        for (int q : a.rows[static_cast<size_t>(p)]) {
            const auto& br = b.rows[static_cast<size_t>(q)];
            acc.insert(acc.end(), br.begin(), br.end());
        }
        std::sort(acc.begin(), acc.end());
        acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
        out.rows[static_cast<size_t>(p)] = acc;
    }
    out.finalize();
    return out;
}

AdjacencyStore::AdjacencyStore(std::array<BoolMatrix, 4> adjacency)
    : adjacency_(std::move(adjacency)) {}

const BoolMatrix& AdjacencyStore::hop(RelationKind r, int n) const {
    if (n < 1) throw RuntimeFailure("multi_hop: n must be >= 1");
    if (n == 1) return adjacency(r);
    std::lock_guard<std::mutex> lock(mu_);
    return hop_unlocked(r, n);
}

const BoolMatrix& AdjacencyStore::hop_unlocked(RelationKind r, int n) const {
    if (n == 1) return adjacency(r);
    auto key = std::make_pair(static_cast<int>(r), n);
    auto it = hop_cache_.find(key);
    if (it != hop_cache_.end()) return *it->second;

    // Largest power of two strictly below n, then multiply the halves.
    int p = 1;
    while (p * 2 < n) p *= 2;
    const BoolMatrix& left = hop_unlocked(r, p);
    const BoolMatrix& right = hop_unlocked(r, n - p);
    auto result = std::make_unique<BoolMatrix>(bool_multiply(left, right));
    const BoolMatrix& ref = *result;
    hop_cache_.emplace(key, std::move(result));
    return ref;
}

std::vector<LaneSegment> sample_segments(const std::vector<Vec2>& polyline,
                                         double spacing, int lane_id,
                                         SemanticFlags flags) {
    if (polyline.size() < 2)
        throw InvalidInputError("polyline needs at least 2 points");
    if (spacing <= 0.0) throw InvalidInputError("spacing must be positive");

    std::vector<double> cum{0.0};
    for (size_t i = 1; i < polyline.size(); ++i)
        cum.push_back(cum.back() + (polyline[i] - polyline[i - 1]).norm());
    const double total = cum.back();
    const int count = static_cast<int>(std::floor(total / spacing));
    if (count < 1) throw InvalidInputError("polyline too short");

    auto point_at = [&](double s) {
        size_t i = 1;
        while (i + 1 < cum.size() && cum[i] < s) ++i;
        const Vec2 a = polyline[i - 1], b = polyline[i];
        const double seg_len = cum[i] - cum[i - 1];
        const double t = seg_len > 0.0 ? (s - cum[i - 1]) / seg_len : 0.0;
        return a + (b - a) * t;
    };

    std::vector<LaneSegment> segs(static_cast<size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double s0 = static_cast<double>(k) * spacing;
        const double s1 = std::min(s0 + spacing, total);
        LaneSegment& seg = segs[static_cast<size_t>(k)];
        seg.id = k;
        seg.center = point_at(s0 + 0.5 * spacing);
        // Tangent over the segment's own extent; exact for lines and arcs.
        seg.direction = (point_at(s1) - point_at(s0)).normalized();
        seg.length = spacing;
        seg.lane_id = lane_id;
        seg.flags = flags;
    }
    for (int k = 0; k + 1 < count; ++k) {
        const double dh = wrap_angle(segs[static_cast<size_t>(k + 1)].direction.angle() -
                                     segs[static_cast<size_t>(k)].direction.angle());
        segs[static_cast<size_t>(k)].curvature = dh / spacing;
    }
    if (count >= 2)
        segs[static_cast<size_t>(count - 1)].curvature =
            segs[static_cast<size_t>(count - 2)].curvature;
    return segs;
}

namespace {

int nearest_segment(const std::vector<LaneSegment>& segments,
                    const std::vector<int>& candidates, const Vec2& p) {
    int best = -1;
    double best_d = 0.0;
    for (int id : candidates) {
        double d = (segments[static_cast<size_t>(id)].center - p).norm_sq();
        if (best < 0 || d < best_d) {
            best = id;
            best_d = d;
        }
    }
    return best;
}

}  // namespace

LaneGraph build_adjacency(std::vector<LaneSegment> segments,
                          const std::vector<LaneTopologyEntry>& topology) {
    const int m = static_cast<int>(segments.size());
    for (int i = 0; i < m; ++i) segments[static_cast<size_t>(i)].id = i;

    // Segment ids grouped per lane, in list order (= arc order per lane).
    std::map<int, std::vector<int>> by_lane;
    for (const auto& s : segments) by_lane[s.lane_id].push_back(s.id);

    std::array<BoolMatrix, 4> adj = {BoolMatrix::empty(m), BoolMatrix::empty(m),
                                     BoolMatrix::empty(m), BoolMatrix::empty(m)};
    auto& pre = adj[static_cast<size_t>(RelationKind::Predecessor)];
    auto& suc = adj[static_cast<size_t>(RelationKind::Successor)];
    auto& left = adj[static_cast<size_t>(RelationKind::LeftNeighbor)];
    auto& right = adj[static_cast<size_t>(RelationKind::RightNeighbor)];

    auto add_suc = [&](int from, int to) {
        suc.add_edge(from, to);
        pre.add_edge(to, from);
    };

    for (const auto& [lane, ids] : by_lane)
        for (size_t i = 0; i + 1 < ids.size(); ++i) add_suc(ids[i], ids[i + 1]);

    auto lane_ids = [&](int lane) -> const std::vector<int>& {
        auto it = by_lane.find(lane);
        if (it == by_lane.end())
            throw InvalidInputError("topology references unknown lane_id " +
                                    std::to_string(lane));
        return it->second;
    };

    for (const auto& e : topology) {
        const auto& ids_a = lane_ids(e.lane_a);
        const auto& ids_b = lane_ids(e.lane_b);
        switch (e.relation) {
            case RelationKind::LeftNeighbor:
                for (int p : ids_a) {
                    int q = nearest_segment(segments, ids_b,
                                            segments[static_cast<size_t>(p)].center);
                    left.add_edge(p, q);
                    right.add_edge(q, p);
                }
                break;
            case RelationKind::RightNeighbor:
                for (int p : ids_a) {
                    int q = nearest_segment(segments, ids_b,
                                            segments[static_cast<size_t>(p)].center);
                    right.add_edge(p, q);
                    left.add_edge(q, p);
                }
                break;
            case RelationKind::Successor:
                // lane_b continues lane_a
                add_suc(ids_a.back(), ids_b.front());
                break;
            case RelationKind::Predecessor:
                // lane_b feeds into lane_a
                add_suc(ids_b.back(), ids_a.front());
                break;
        }
    }

    for (auto& a : adj) a.finalize();
    LaneGraph g;
    g.segments = std::move(segments);
    g.store = std::make_shared<AdjacencyStore>(std::move(adj));
    return g;
}

const BoolMatrix& multi_hop(const LaneGraph& graph, RelationKind r, int n) {
    return graph.store->hop(r, n);
}

}  // namespace lanercnn
