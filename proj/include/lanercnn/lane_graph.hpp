#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "lanercnn/geometry.hpp"
#include "lanercnn/util.hpp"

namespace lanercnn {

struct SemanticFlags {
    bool is_turn = false;
    bool has_traffic_control = false;
    bool is_intersection = false;

    bool operator==(const SemanticFlags&) const = default;
};

// A short piece of lane centerline; one graph node.
struct LaneSegment {
    int id = 0;
    Vec2 center;
    Vec2 direction{1.0, 0.0};  // unit tangent
    double length = 0.0;
    double curvature = 0.0;  // 1/m, signed (left turn positive)
    int lane_id = 0;
    SemanticFlags flags;

    Pose pose() const { return Pose{center, direction}; }
};

enum class RelationKind : int {
    Predecessor = 0,
    Successor = 1,
    LeftNeighbor = 2,
    RightNeighbor = 3,
};

constexpr std::array<RelationKind, 4> kAllRelations = {
    RelationKind::Predecessor, RelationKind::Successor,
    RelationKind::LeftNeighbor, RelationKind::RightNeighbor};

RelationKind inverse_relation(RelationKind r);
const char* relation_token(RelationKind r);       // "pre" "suc" "left" "right"
RelationKind relation_from_token(const std::string& token);

// Sparse boolean matrix as sorted target lists per source row. The transpose
// is materialized eagerly; backward passes of graph ops read it.
struct BoolMatrix {
    int size = 0;
    std::vector<std::vector<int>> rows;
    std::vector<std::vector<int>> rows_t;

    static BoolMatrix empty(int size);
    void add_edge(int from, int to);
    void finalize();  // sort rows, rebuild transpose
    bool has_edges() const;
    int64_t num_edges() const;
    bool contains(int from, int to) const;

    bool operator==(const BoolMatrix& o) const {
        return size == o.size && rows == o.rows;
    }
};

// Boolean (OR-AND) product: out(p,q) = 1 iff exists r with a(p,r) and b(r,q).
BoolMatrix bool_multiply(const BoolMatrix& a, const BoolMatrix& b);

// Adjacency per relation plus the lazily grown n-hop cache. Shared between
// graph copies; reads are safe from multiple threads.
class AdjacencyStore {
public:
    explicit AdjacencyStore(std::array<BoolMatrix, 4> adjacency);

    const BoolMatrix& adjacency(RelationKind r) const {
        return adjacency_[static_cast<size_t>(r)];
    }
    const BoolMatrix& hop(RelationKind r, int n) const;

private:
    const BoolMatrix& hop_unlocked(RelationKind r, int n) const;

    std::array<BoolMatrix, 4> adjacency_;
    mutable std::mutex mu_;
    mutable std::map<std::pair<int, int>, std::unique_ptr<BoolMatrix>> hop_cache_;
};

struct LaneGraph {
    std::vector<LaneSegment> segments;
    std::shared_ptr<AdjacencyStore> store;

    int num_nodes() const { return static_cast<int>(segments.size()); }
    const BoolMatrix& adjacency(RelationKind r) const { return store->adjacency(r); }
};

struct LaneTopologyEntry {
    int lane_a = 0;
    int lane_b = 0;
    RelationKind relation = RelationKind::LeftNeighbor;
};

// Uniform arc-length sampling of a polyline into segments of `spacing`
// meters, centered at spacing/2, 3*spacing/2, ...; exactly
// floor(total_length / spacing) segments come out and the partial tail is
// dropped. Direction is the local tangent; curvature is the wrapped heading
// change to the next sample divided by spacing (the last sample copies its
// neighbor, a single sample gets zero).
std::vector<LaneSegment> sample_segments(const std::vector<Vec2>& polyline,
                                         double spacing, int lane_id = 0,
                                         SemanticFlags flags = {});

// Chains consecutive same-lane segments with successor/predecessor edges and
// connects lanes per the topology list: left/right attach every segment to
// its nearest segment (by center distance, ties to the lower id) in the
// neighbor lane, suc/pre join lane endpoints. Predecessor is maintained as
// the exact transpose of successor, and left/right as mutual inverses.
LaneGraph build_adjacency(std::vector<LaneSegment> segments,
                          const std::vector<LaneTopologyEntry>& topology);

// bool(E^n(r)): (p,q) set iff a directed walk of exactly n edges of relation
// r runs p -> q. Results are cached in the graph's store.
const BoolMatrix& multi_hop(const LaneGraph& graph, RelationKind r, int n);

}  // namespace lanercnn
