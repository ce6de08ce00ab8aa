#include "lanercnn/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lanercnn {

Vec2 BezierCurve::point_at_param(double u) const {
    const double w0 = (1.0 - u) * (1.0 - u), w1 = 2.0 * (1.0 - u) * u, w2 = u * u;
    return p0 * w0 + p1 * w1 + p2 * w2;
}

namespace {

// Index of the table segment [i, i+1] containing arc position s (clamped to
// the end segments).
size_t segment_for_arc(const std::vector<double>& cum, double s) {
    if (s <= cum.front()) return 0;
    if (s >= cum.back()) return cum.size() - 2;
    auto it = std::upper_bound(cum.begin(), cum.end(), s);
    return static_cast<size_t>(std::distance(cum.begin(), it)) - 1;
}

Vec2 segment_dir(const std::vector<Vec2>& pts, size_t i) {
    return (pts[i + 1] - pts[i]).normalized();
}

}  // namespace

Vec2 BezierCurve::position_at_arc(double s) const {
    const size_t i = segment_for_arc(cum, s);
    const double len = cum[i + 1] - cum[i];
    const double t = len > 0.0 ? (s - cum[i]) / len : 0.0;
    return pts[i] + (pts[i + 1] - pts[i]) * t;  // extrapolates beyond the ends
}

Vec2 BezierCurve::tangent_at_arc(double s) const {
    return segment_dir(pts, segment_for_arc(cum, s));
}

BezierCurve fit_bezier(const Pose& start, const Pose& goal, int samples) {
    const Vec2 g = goal.position - start.position;
    const double dist = g.norm();
    if (dist < 1e-9) throw InvalidInputError("zero-length proposal");

    BezierCurve c;
    c.p0 = start.position;
    c.p2 = goal.position;

    const Vec2 d0 = start.direction, d2 = goal.direction;
    const double det = d0.cross(d2);
    c.tangent_exact = false;
    if (std::abs(det) > 1e-9) {
        const double t = g.cross(d2) / det;   // along the start tangent ray
        const double u = d0.cross(g) / det;   // back along the goal tangent
        if (t > 0.0 && u > 0.0 && t <= 10.0 * dist && u <= 10.0 * dist) {
            c.p1 = c.p0 + d0 * t;
            c.tangent_exact = true;
        }
    }
    if (!c.tangent_exact) c.p1 = (c.p0 + c.p2) * 0.5;

    c.pts.resize(static_cast<size_t>(samples) + 1);
    c.cum.resize(static_cast<size_t>(samples) + 1);
    for (int i = 0; i <= samples; ++i)
        c.pts[static_cast<size_t>(i)] =
            c.point_at_param(static_cast<double>(i) / samples);
    c.cum[0] = 0.0;
    for (int i = 1; i <= samples; ++i)
        c.cum[static_cast<size_t>(i)] =
            c.cum[static_cast<size_t>(i) - 1] +
            (c.pts[static_cast<size_t>(i)] - c.pts[static_cast<size_t>(i) - 1]).norm();
    return c;
}

FrenetPoint to_frenet(const BezierCurve& curve, const Vec2& point) {
    const auto& pts = curve.pts;
    const auto& cum = curve.cum;
    FrenetPoint best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const Vec2 seg = pts[i + 1] - pts[i];
        const double len2 = seg.norm_sq();
        if (len2 <= 0.0) continue;
        double t = (point - pts[i]).dot(seg) / len2;
        // End segments project onto their infinite extensions so points
        // beyond the curve still get consistent coordinates.
        if (i > 0) t = std::max(t, 0.0);
        if (i + 2 < pts.size()) t = std::min(t, 1.0);
        const Vec2 proj = pts[i] + seg * t;
        const double d2 = (point - proj).norm_sq();
        if (d2 < best_dist) {
            best_dist = d2;
            const Vec2 dir = seg * (1.0 / std::sqrt(len2));
            best.s = cum[i] + t * (cum[i + 1] - cum[i]);
            best.d = dir.cross(point - proj);
        }
    }
    return best;
}

Vec2 from_frenet(const BezierCurve& curve, const FrenetPoint& fp) {
    const size_t i = segment_for_arc(curve.cum, fp.s);
    const Vec2 dir = segment_dir(curve.pts, i);
    const double len = curve.cum[i + 1] - curve.cum[i];
    const double t = len > 0.0 ? (fp.s - curve.cum[i]) / len : 0.0;
    const Vec2 base = curve.pts[i] + (curve.pts[i + 1] - curve.pts[i]) * t;
    return base + dir.perp() * fp.d;
}

double rollout_arc_at(double v, double a, double t) {
    return v * t + 0.5 * a * t * t;
}

TrajectoryProposal rollout(const BezierCurve& curve, double v, double horizon,
                           double dt) {
    if (v < 0.0) throw InvalidInputError("rollout requires v >= 0");
    TrajectoryProposal p;
    p.curve = curve;
    p.v = v;
    const double s_total = curve.total_length();
    p.a = 2.0 * (s_total - v * horizon) / (horizon * horizon);
    const int steps = static_cast<int>(std::llround(horizon / dt));
    p.waypoints.reserve(static_cast<size_t>(steps));
    p.arc_positions.reserve(static_cast<size_t>(steps));
    for (int k = 1; k <= steps; ++k) {
        const double t = dt * k;
        const double s = std::clamp(rollout_arc_at(v, p.a, t), 0.0, s_total);
        p.arc_positions.push_back(s);
        p.waypoints.push_back(p.curve.position_at_arc(s));
    }
    return p;
}

std::vector<GoalCandidate> select_goals(const std::vector<double>& logits,
                                        const std::vector<double>& residues,
                                        const std::vector<Pose>& node_poses,
                                        int k, double dedup_radius) {
    const size_t m = node_poses.size();
    if (m < 1) throw InvalidInputError("goal selection needs at least one node");
    if (k < 1) throw InvalidInputError("K must be >= 1");
    if (logits.size() != m || residues.size() != 4 * m)
        throw RuntimeFailure("goal head outputs do not match roi size");

    std::vector<GoalCandidate> all(m);
    for (size_t i = 0; i < m; ++i) {
        GoalCandidate& c = all[i];
        c.node = static_cast<int>(i);
        const double x = logits[i];
        c.score = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                           : std::exp(x) / (1.0 + std::exp(x));
        const double* r = residues.data() + 4 * i;
        const Pose& np = node_poses[i];
        c.pose.position = np.position + Vec2{r[0], r[1]};
        const double heading = np.direction.angle() + std::atan2(r[2], r[3]);
        c.pose.direction = {std::cos(heading), std::sin(heading)};
    }
    std::sort(all.begin(), all.end(), [](const GoalCandidate& a, const GoalCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.node < b.node;
    });

    std::vector<GoalCandidate> picked, skipped;
    for (const auto& c : all) {
        if (static_cast<int>(picked.size()) >= k) break;
        bool close = false;
        for (const auto& p : picked)
            if ((p.pose.position - c.pose.position).norm() < dedup_radius) {
                close = true;
                break;
            }
        (close ? skipped : picked).push_back(c);
    }
    for (const auto& c : skipped) {
        if (static_cast<int>(picked.size()) >= k) break;
        picked.push_back(c);
    }
    for (size_t i = 0; static_cast<int>(picked.size()) < k; ++i)
        picked.push_back(picked[i % picked.size()]);
    return picked;
}

std::vector<Vec2> apply_refinement(const TrajectoryProposal& proposal,
                                   const std::vector<double>& residues) {
    const size_t t_steps = proposal.waypoints.size();
    if (residues.size() != 2 * t_steps)
        throw RuntimeFailure("refinement residues must be T x 2");
    std::vector<Vec2> out(t_steps);
    for (size_t t = 0; t < t_steps; ++t)
        out[t] = from_frenet(proposal.curve,
                             {proposal.arc_positions[t] + residues[2 * t],
                              residues[2 * t + 1]});
    return out;
}

std::vector<Pose> proposal_poses(const TrajectoryProposal& proposal) {
    std::vector<Pose> poses(proposal.waypoints.size());
    for (size_t t = 0; t < poses.size(); ++t)
        poses[t] = Pose{proposal.waypoints[t],
                        proposal.curve.tangent_at_arc(proposal.arc_positions[t])};
    return poses;
}

}  // namespace lanercnn
