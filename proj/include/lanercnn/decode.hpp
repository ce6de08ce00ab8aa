#pragma once

#include <vector>

#include "lanercnn/geometry.hpp"
#include "lanercnn/util.hpp"

namespace lanercnn {

// Quadratic Bezier with a dense arc-length table for position lookup and
// Frenet projection. B(0) = p0 and B(1) = p2 exactly; the curve tangents at
// the ends are parallel to (p1-p0) and (p2-p1).
struct BezierCurve {
    Vec2 p0, p1, p2;
    std::vector<Vec2> pts;     // table points at uniform parameter steps
    std::vector<double> cum;   // cumulative chord arc length, cum[0] = 0
    bool tangent_exact = false;  // p1 came from the tangent ray intersection

    double total_length() const { return cum.back(); }
    Vec2 point_at_param(double u) const;

    // Table lookups; s outside [0, length] extrapolates along the end tangent.
    Vec2 position_at_arc(double s) const;
    Vec2 tangent_at_arc(double s) const;
};

// p1 is placed at the intersection of the start tangent ray and the reversed
// goal tangent ray, which satisfies both endpoint positions and tangent
// directions. Near-parallel tangents, intersections behind either ray, or
// intersections beyond 10x the endpoint distance fall back to the chord
// midpoint (straight-line proposal, tangent_exact = false).
BezierCurve fit_bezier(const Pose& start, const Pose& goal, int samples = 1024);

struct FrenetPoint {
    double s = 0.0;  // arc length along the curve
    double d = 0.0;  // signed lateral offset, positive left of the tangent
};

FrenetPoint to_frenet(const BezierCurve& curve, const Vec2& point);
Vec2 from_frenet(const BezierCurve& curve, const FrenetPoint& fp);

// Constant-acceleration rollout along the curve:
//   a = 2 (s_total - v T) / T^2,  s(t) = v t + a t^2 / 2   (Appendix-style
// profile), with s(t) clamped to [0, s_total] so proposals never run
// backward or off the curve.
struct TrajectoryProposal {
    BezierCurve curve;
    double v = 0.0;
    double a = 0.0;
    std::vector<Vec2> waypoints;        // at t = dt, 2dt, ..., horizon
    std::vector<double> arc_positions;  // clamped s(t) per waypoint
    double score = 0.0;
    int goal_node = -1;  // local roi node index behind this proposal
};

TrajectoryProposal rollout(const BezierCurve& curve, double v, double horizon,
                           double dt);

// Unclamped longitudinal profile, exposed for the algebraic identities
// s(T) = s_total and a = 2(s - vT)/T^2.
double rollout_arc_at(double v, double a, double t);

struct GoalCandidate {
    int node = -1;  // local roi node index
    double score = 0.0;
    Pose pose;
};

// Greedy top-K goal selection by sigmoid score (ties to the lower node id).
// A candidate whose goal position lies within dedup_radius of an already
// picked goal is skipped; skipped candidates fill remaining slots when the
// distinct ones run out, and the picked list repeats as a last resort so K
// goals always come back.
std::vector<GoalCandidate> select_goals(const std::vector<double>& logits,
                                        const std::vector<double>& residues,
                                        const std::vector<Pose>& node_poses,
                                        int k, double dedup_radius);

// Waypoints after applying refine-head residues (delta_s, d) per timestep.
std::vector<Vec2> apply_refinement(const TrajectoryProposal& proposal,
                                   const std::vector<double>& residues);

// Poses along the proposal (position = waypoint, direction = curve tangent).
std::vector<Pose> proposal_poses(const TrajectoryProposal& proposal);

}  // namespace lanercnn
