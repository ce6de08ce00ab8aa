#include "lanercnn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lanercnn {

using ad::Tensor;

NodeLabeling label_nodes(const LaneRoI& roi, const Vec2& gt_final,
                         double neg_distance) {
    const auto& segs = roi.local_graph.segments;
    NodeLabeling out;
    out.labels.assign(segs.size(), NodeLabel::DontCare);

    int nearest = -1;
    double nearest_d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < segs.size(); ++i) {
        const double d = (segs[i].center - gt_final).norm();
        if (d < nearest_d) {
            nearest_d = d;
            nearest = static_cast<int>(i);
        }
        if (d > neg_distance) out.labels[i] = NodeLabel::Negative;
    }
    if (nearest >= 0 && nearest_d <= neg_distance) {
        out.positive = nearest;
        out.labels[static_cast<size_t>(nearest)] = NodeLabel::Positive;
    }
    return out;
}

Tensor loss_cls(const Tensor& logits, const NodeLabeling& labeling, Rng& rng,
                int hard_negatives) {
    if (labeling.positive < 0) throw GoalOutsideRoiError();

    Tensor pos_logit = ad::gather_rows(logits, {labeling.positive});
    Tensor pos_loss =
        ad::mean(ad::bce_with_logits(pos_logit, Tensor::full({1, 1}, 1.0)));

    std::vector<int> negatives;
    for (size_t i = 0; i < labeling.labels.size(); ++i)
        if (labeling.labels[i] == NodeLabel::Negative)
            negatives.push_back(static_cast<int>(i));
    if (negatives.empty()) return pos_loss;

    // Random quarter subsample (partial Fisher-Yates), then the hardest.
    const size_t subsample =
        static_cast<size_t>((negatives.size() + 3) / 4);
    for (size_t i = 0; i < subsample; ++i) {
        const size_t j = i + rng.uniform_int(negatives.size() - i);
        std::swap(negatives[i], negatives[j]);
    }
    negatives.resize(subsample);
    std::sort(negatives.begin(), negatives.end());

    Tensor neg_losses = ad::bce_with_logits(
        ad::gather_rows(logits, negatives),
        Tensor::zeros({static_cast<int64_t>(negatives.size()), 1}));

    std::vector<int> order(negatives.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double la = neg_losses.values()[static_cast<size_t>(a)];
        const double lb = neg_losses.values()[static_cast<size_t>(b)];
        if (la != lb) return la > lb;
        return a < b;
    });
    order.resize(std::min<size_t>(order.size(),
                                  static_cast<size_t>(hard_negatives)));
    std::sort(order.begin(), order.end());

    Tensor neg_loss = ad::mean(ad::gather_rows(neg_losses, order));
    return ad::add(pos_loss, neg_loss);
}

Tensor loss_reg(const Tensor& residues, const NodeLabeling& labeling,
                const LaneRoI& roi, const Pose& gt) {
    if (labeling.positive < 0) throw GoalOutsideRoiError();
    const LaneSegment& seg =
        roi.local_graph.segments[static_cast<size_t>(labeling.positive)];
    const double dth = gt.direction.angle() - seg.direction.angle();
    Tensor target = Tensor::from(
        {1, 4}, {gt.position.x - seg.center.x, gt.position.y - seg.center.y,
                 std::sin(dth), std::cos(dth)});
    Tensor pred = ad::gather_rows(residues, {labeling.positive});
    return ad::mean(ad::smooth_l1(ad::sub(pred, target)));
}

Tensor loss_refine(const Tensor& refined_residues,
                   const std::vector<Vec2>& gt_future,
                   const TrajectoryProposal& proposal, double max_lateral) {
    const int64_t t_steps = refined_residues.dim(0);
    if (refined_residues.rank() != 2 || refined_residues.dim(1) != 2 ||
        t_steps != static_cast<int64_t>(gt_future.size()) ||
        t_steps != static_cast<int64_t>(proposal.arc_positions.size()))
        throw RuntimeFailure("loss_refine: residues must be T x 2 matching GT");

    std::vector<int> included;
    std::vector<double> base, target;
    for (int64_t t = 0; t < t_steps; ++t) {
        const FrenetPoint fp = to_frenet(proposal.curve, gt_future[static_cast<size_t>(t)]);
        if (std::abs(fp.d) > max_lateral) continue;
        included.push_back(static_cast<int>(t));
        base.insert(base.end(), {proposal.arc_positions[static_cast<size_t>(t)], 0.0});
        target.insert(target.end(), {fp.s, fp.d});
    }
    if (included.empty()) return Tensor::scalar(0.0);

    const int64_t n = static_cast<int64_t>(included.size());
    Tensor pred = ad::gather_rows(refined_residues, included);
    Tensor absolute = ad::add(pred, Tensor::from({n, 2}, std::move(base)));
    Tensor diff = ad::sub(absolute, Tensor::from({n, 2}, std::move(target)));
    return ad::mean(ad::smooth_l1(diff));
}

Pose gt_final_pose(const ActorTrack& actor) {
    if (!actor.future || actor.future->empty())
        throw RuntimeFailure("actor has no future track");
    const auto& fut = *actor.future;
    Pose pose;
    pose.position = fut.back();
    // Heading from the last moving displacement across future then past.
    std::vector<Vec2> all = actor.past;
    all.insert(all.end(), fut.begin(), fut.end());
    for (size_t i = all.size(); i-- > 1;) {
        const Vec2 d = all[i] - all[i - 1];
        if (d.norm() >= 1e-6) {
            pose.direction = d.normalized();
            return pose;
        }
    }
    return pose;  // fully stationary: unit x
}

SceneLossBreakdown scene_loss(const LaneRCNN& model, const SceneForward& fwd,
                              const Scene& scene, const LossWeights& weights,
                              Rng& rng) {
    SceneLossBreakdown out;
    std::vector<Tensor> actor_losses;

    for (const auto& af : fwd.actors) {
        const ActorTrack& actor = scene.actors[static_cast<size_t>(af.actor_index)];
        if (!actor.future || actor.future->size() <
                                 static_cast<size_t>(model.config().future_steps))
            continue;
        const Pose gt = gt_final_pose(actor);
        const NodeLabeling labeling = label_nodes(af.roi, gt.position);
        if (labeling.positive < 0) {
            ++out.actors_skipped;
            continue;
        }

        Tensor cls = loss_cls(af.goals.logits, labeling, rng);
        Tensor reg = loss_reg(af.goals.residues, labeling, af.roi, gt);

        // Teacher-forced proposal through the positive node's predicted goal.
        const ActorTrack padded = pad_past(actor, model.config().past_steps);
        Pose start;
        start.position = padded.current_position();
        if (auto h = padded.heading()) start.direction = *h;
        const LaneSegment& seg =
            af.roi.local_graph.segments[static_cast<size_t>(labeling.positive)];
        const double* r =
            af.goals.residues.data() + 4 * static_cast<int64_t>(labeling.positive);
        Pose goal_pose;
        goal_pose.position = seg.center + Vec2{r[0], r[1]};
        const double heading = seg.direction.angle() + std::atan2(r[2], r[3]);
        goal_pose.direction = {std::cos(heading), std::sin(heading)};

        Tensor refine;
        bool have_refine = false;
        try {
            BezierCurve curve =
                fit_bezier(start, goal_pose, model.config().arc_samples);
            TrajectoryProposal prop =
                rollout(curve, padded.current_speed(model.config().dt),
                        model.config().horizon_seconds(), model.config().dt);
            prop.goal_node = labeling.positive;
            Tensor residues = model.refine_residues(af.roi, prop);
            refine = loss_refine(residues, *actor.future, prop,
                                 model.config().max_lateral);
            have_refine = true;
        } catch (const InvalidInputError&) {
            refine = Tensor::scalar(0.0);  // degenerate zero-length proposal
        }
        (void)have_refine;

        Tensor total = ad::add(cls, ad::add(ad::scale(reg, weights.alpha),
                                            ad::scale(refine, weights.beta)));
        out.l_cls += cls.item();
        out.l_reg += reg.item();
        out.l_refine += refine.item();
        actor_losses.push_back(total);
        ++out.actors_used;
    }

    if (actor_losses.empty()) {
        out.total = Tensor::scalar(0.0);
        return out;
    }
    Tensor summed = actor_losses.size() == 1 ? actor_losses[0]
                                             : ad::add_n(actor_losses);
    const double inv = 1.0 / static_cast<double>(actor_losses.size());
    out.total = ad::scale(summed, inv);
    out.l_cls *= inv;
    out.l_reg *= inv;
    out.l_refine *= inv;
    return out;
}

}  // namespace lanercnn
