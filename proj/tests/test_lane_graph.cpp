#include <doctest.h>

#include <cmath>
#include <set>

#include "lanercnn/lane_graph.hpp"

using namespace lanercnn;

namespace {

std::vector<Vec2> straight_polyline(double length, double step = 0.5) {
    std::vector<Vec2> pts;
    for (double x = 0.0; x <= length + 1e-12; x += step) pts.emplace_back(x, 0.0);
    return pts;
}

// Exact n-step walk existence from every source, one BFS level at a time.
BoolMatrix bfs_oracle(const BoolMatrix& adj, int n) {
    BoolMatrix out = BoolMatrix::empty(adj.size);
    for (int src = 0; src < adj.size; ++src) {
        std::set<int> frontier{src};
        for (int step = 0; step < n; ++step) {
            std::set<int> next;
            for (int p : frontier)
                for (int q : adj.rows[static_cast<size_t>(p)]) next.insert(q);
            frontier = std::move(next);
            if (frontier.empty()) break;
        }
        for (int q : frontier) out.add_edge(src, q);
    }
    out.finalize();
    return out;
}

LaneGraph random_graph(Rng& rng, int max_nodes = 50) {
    const int n = 2 + static_cast<int>(rng.uniform_int(static_cast<uint64_t>(max_nodes - 1)));
    std::vector<LaneSegment> segs(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        segs[static_cast<size_t>(i)].id = i;
        segs[static_cast<size_t>(i)].center = {rng.uniform(-50, 50), rng.uniform(-50, 50)};
        segs[static_cast<size_t>(i)].length = 1.0;
        segs[static_cast<size_t>(i)].lane_id = i;  // no implicit chain edges
    }
    LaneGraph g = build_adjacency(std::move(segs), {});
    // Random edges per relation, keeping the transpose invariants intact.
    std::array<BoolMatrix, 4> adj = {BoolMatrix::empty(n), BoolMatrix::empty(n),
                                     BoolMatrix::empty(n), BoolMatrix::empty(n)};
    const int edges = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(3 * n)));
    for (int e = 0; e < edges; ++e) {
        const int p = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n)));
        const int q = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n)));
        const int r = static_cast<int>(rng.uniform_int(2));
        if (r == 0) {
            adj[static_cast<size_t>(RelationKind::Successor)].add_edge(p, q);
            adj[static_cast<size_t>(RelationKind::Predecessor)].add_edge(q, p);
        } else {
            adj[static_cast<size_t>(RelationKind::LeftNeighbor)].add_edge(p, q);
            adj[static_cast<size_t>(RelationKind::RightNeighbor)].add_edge(q, p);
        }
    }
    for (auto& a : adj) a.finalize();
    g.store = std::make_shared<AdjacencyStore>(std::move(adj));
    return g;
}

}  // namespace

TEST_SUITE("lane_graph") {

TEST_CASE("straight polyline sampling") {
    auto segs = sample_segments({{0, 0}, {4, 0}}, 1.0);
    REQUIRE(segs.size() == 4);
    for (int k = 0; k < 4; ++k) {
        CHECK(segs[static_cast<size_t>(k)].center.x == doctest::Approx(0.5 + k));
        CHECK(segs[static_cast<size_t>(k)].center.y == doctest::Approx(0.0));
        CHECK(segs[static_cast<size_t>(k)].direction.x == doctest::Approx(1.0));
        CHECK(segs[static_cast<size_t>(k)].curvature == doctest::Approx(0.0));
        CHECK(segs[static_cast<size_t>(k)].length == doctest::Approx(1.0));
    }
}

TEST_CASE("sample count is floor(length / spacing) for straight polylines") {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const double spacing = rng.uniform(0.3, 2.0);
        const double len = rng.uniform(spacing + 0.1, 40.0);
        auto poly = straight_polyline(len, 0.37);
        const double total = polyline_length(poly);
        auto segs = sample_segments(poly, spacing);
        CHECK(segs.size() == static_cast<size_t>(std::floor(total / spacing)));
    }
}

TEST_CASE("quarter circle curvature within 5%") {
    const double radius = 10.0;
    std::vector<Vec2> arc;
    for (int i = 0; i <= 200; ++i) {
        const double th = 0.5 * 3.14159265358979323846 * i / 200.0;
        arc.emplace_back(radius * std::sin(th), radius * (1.0 - std::cos(th)));
    }
    auto segs = sample_segments(arc, 1.0);
    REQUIRE(segs.size() >= 10);
    for (const auto& s : segs)
        CHECK(std::abs(s.curvature - 0.1) < 0.005);  // analytic 1/R oracle
    for (const auto& s : segs)
        CHECK(s.direction.norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("degenerate polyline errors") {
    CHECK_THROWS_AS(sample_segments({{0, 0}, {0.4, 0}}, 1.0), InvalidInputError);
    CHECK_THROWS_AS(sample_segments({{0, 0}}, 1.0), InvalidInputError);
    CHECK_THROWS_AS(sample_segments({{0, 0}, {4, 0}}, 0.0), InvalidInputError);
}

TEST_CASE("chain adjacency has exactly the consecutive successor edges") {
    auto segs = sample_segments({{0, 0}, {3, 0}}, 1.0, /*lane_id=*/7);
    LaneGraph g = build_adjacency(segs, {});
    const auto& suc = g.adjacency(RelationKind::Successor);
    CHECK(suc.num_edges() == 2);
    CHECK(suc.contains(0, 1));
    CHECK(suc.contains(1, 2));
    const auto& pre = g.adjacency(RelationKind::Predecessor);
    CHECK(pre.contains(1, 0));
    CHECK(pre.contains(2, 1));
    CHECK(!g.adjacency(RelationKind::LeftNeighbor).has_edges());
    CHECK(!g.adjacency(RelationKind::RightNeighbor).has_edges());
}

TEST_CASE("left/right neighbor edges go to the nearest segment") {
    // Lane 0 along y=0, lane 1 along y=3.5 but shifted, so nearest segments
    // are not index-aligned.
    auto a = sample_segments({{0, 0}, {10, 0}}, 1.0, 0);
    auto b = sample_segments({{1.7, 3.5}, {11.7, 3.5}}, 1.0, 1);
    std::vector<LaneSegment> segs = a;
    segs.insert(segs.end(), b.begin(), b.end());
    LaneGraph g = build_adjacency(segs, {{0, 1, RelationKind::LeftNeighbor},
                                         {1, 0, RelationKind::RightNeighbor}});

    const auto& left = g.adjacency(RelationKind::LeftNeighbor);
    const auto& right = g.adjacency(RelationKind::RightNeighbor);
    for (int p = 0; p < 10; ++p) {
        CHECK(left.rows[static_cast<size_t>(p)].size() >= 1);
        // exhaustive nearest-distance oracle
        int best = -1;
        double best_d = 1e300;
        for (int q = 10; q < g.num_nodes(); ++q) {
            const double d = (g.segments[static_cast<size_t>(p)].center -
                              g.segments[static_cast<size_t>(q)].center)
                                 .norm();
            if (d < best_d) {
                best_d = d;
                best = q;
            }
        }
        CHECK(left.contains(p, best));
    }
    // mutual inverses
    for (int p = 0; p < g.num_nodes(); ++p)
        for (int q : left.rows[static_cast<size_t>(p)]) CHECK(right.contains(q, p));
    for (int p = 0; p < g.num_nodes(); ++p)
        for (int q : right.rows[static_cast<size_t>(p)]) CHECK(left.contains(q, p));
}

TEST_CASE("unknown lane id in topology errors") {
    auto segs = sample_segments({{0, 0}, {3, 0}}, 1.0, 0);
    CHECK_THROWS_AS(build_adjacency(segs, {{0, 9, RelationKind::LeftNeighbor}}),
                    InvalidInputError);
}

TEST_CASE("cross-lane successor joins lane endpoints") {
    auto a = sample_segments({{0, 0}, {3, 0}}, 1.0, 0);
    auto b = sample_segments({{3, 0}, {6, 0}}, 1.0, 1);
    std::vector<LaneSegment> segs = a;
    segs.insert(segs.end(), b.begin(), b.end());
    LaneGraph g = build_adjacency(segs, {{0, 1, RelationKind::Successor}});
    CHECK(g.adjacency(RelationKind::Successor).contains(2, 3));
    CHECK(g.adjacency(RelationKind::Predecessor).contains(3, 2));
}

TEST_CASE("multi_hop on a chain") {
    auto segs = sample_segments({{0, 0}, {4, 0}}, 1.0, 0);
    LaneGraph g = build_adjacency(segs, {});
    const BoolMatrix& two = multi_hop(g, RelationKind::Successor, 2);
    CHECK(two.num_edges() == 2);
    CHECK(two.contains(0, 2));
    CHECK(two.contains(1, 3));
    CHECK(multi_hop(g, RelationKind::Successor, 1) ==
          g.adjacency(RelationKind::Successor));
    CHECK(!multi_hop(g, RelationKind::Successor, 4).has_edges());
    CHECK_THROWS_AS(multi_hop(g, RelationKind::Successor, 0), RuntimeFailure);
}

TEST_CASE("multi_hop equals BFS brute force on random graphs") {
    Rng rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        LaneGraph g = random_graph(rng, 30);
        for (RelationKind r : kAllRelations)
            for (int n : {1, 2, 3, 4, 5, 6})
                CHECK(multi_hop(g, r, n) == bfs_oracle(g.adjacency(r), n));
    }
}

TEST_CASE("hop reversal: successor^n transposed equals predecessor^n") {
    Rng rng(123);
    for (int trial = 0; trial < 10; ++trial) {
        LaneGraph g = random_graph(rng, 40);
        for (int n : {1, 2, 4, 8, 16, 32}) {
            const BoolMatrix& suc = multi_hop(g, RelationKind::Successor, n);
            const BoolMatrix& pre = multi_hop(g, RelationKind::Predecessor, n);
            CHECK(suc.rows_t == pre.rows);
        }
    }
}

TEST_CASE("hop entries are boolean: parallel paths stay a single edge") {
    // Two walks 0->1->3 and 0->2->3 would count 2 in integer arithmetic.
    std::vector<LaneSegment> segs(4);
    for (int i = 0; i < 4; ++i) {
        segs[static_cast<size_t>(i)].id = i;
        segs[static_cast<size_t>(i)].lane_id = i;
        segs[static_cast<size_t>(i)].length = 1.0;
    }
    LaneGraph g = build_adjacency(segs, {});
    std::array<BoolMatrix, 4> adj = {BoolMatrix::empty(4), BoolMatrix::empty(4),
                                     BoolMatrix::empty(4), BoolMatrix::empty(4)};
    auto& suc = adj[static_cast<size_t>(RelationKind::Successor)];
    auto& pre = adj[static_cast<size_t>(RelationKind::Predecessor)];
    for (auto [p, q] : {std::pair<int, int>{0, 1}, {0, 2}, {1, 3}, {2, 3}}) {
        suc.add_edge(p, q);
        pre.add_edge(q, p);
    }
    for (auto& m : adj) m.finalize();
    g.store = std::make_shared<AdjacencyStore>(std::move(adj));
    const BoolMatrix& two = multi_hop(g, RelationKind::Successor, 2);
    CHECK(two.rows[0] == std::vector<int>{3});
}

}  // TEST_SUITE
