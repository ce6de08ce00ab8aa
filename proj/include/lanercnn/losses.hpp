#pragma once

#include <vector>

#include "lanercnn/decode.hpp"
#include "lanercnn/laneroi.hpp"
#include "lanercnn/model.hpp"

namespace lanercnn {

struct LossWeights {
    double alpha = 0.5;  // goal regression
    double beta = 0.2;   // trajectory refinement
};

enum class NodeLabel : uint8_t { Negative = 0, Positive = 1, DontCare = 2 };

// Positive: the node nearest the ground-truth final position (none when even
// the nearest is beyond neg_distance). Negative: nodes farther than
// neg_distance from it. Everything else is don't-care.
struct NodeLabeling {
    int positive = -1;
    std::vector<NodeLabel> labels;
};

NodeLabeling label_nodes(const LaneRoI& roi, const Vec2& gt_final,
                         double neg_distance = 6.0);

// Raised when a scene's ground-truth goal has no positive node; training
// logs and skips the actor.
class GoalOutsideRoiError : public RuntimeFailure {
public:
    GoalOutsideRoiError() : RuntimeFailure("GT goal outside roi") {}
};

// Binary cross entropy with online hard example mining: the positive plus
// the hardest `hard_negatives` among a random quarter of the negatives
// (all survivors when fewer). Loss = mean(positive) + mean(selected).
ad::Tensor loss_cls(const ad::Tensor& logits, const NodeLabeling& labeling,
                    Rng& rng, int hard_negatives = 100);

// Smooth-L1 over the 4 residue values at the positive node.
ad::Tensor loss_reg(const ad::Tensor& residues, const NodeLabeling& labeling,
                    const LaneRoI& roi, const Pose& gt_final_pose);

// Smooth-L1 between refined Frenet values and the projection of the
// ground-truth future onto the proposal, computed on the fly. Timesteps
// whose ground truth lies beyond max_lateral of the curve are excluded.
ad::Tensor loss_refine(const ad::Tensor& refined_residues,
                       const std::vector<Vec2>& gt_future,
                       const TrajectoryProposal& proposal, double max_lateral);

// Final pose of a ground-truth future (heading from its last displacement,
// falling back to the past track for stationary ends).
Pose gt_final_pose(const ActorTrack& actor);

struct SceneLossBreakdown {
    ad::Tensor total;  // L_cls + alpha L_reg + beta L_refine
    double l_cls = 0.0;
    double l_reg = 0.0;
    double l_refine = 0.0;
    int actors_used = 0;
    int actors_skipped = 0;
};

// Loss over every actor with a future, averaged per scene. The refinement
// term is teacher-forced: the proposal anchored at the positive node with
// the predicted residues there, treated as constant geometry.
SceneLossBreakdown scene_loss(const LaneRCNN& model, const SceneForward& fwd,
                              const Scene& normalized_scene,
                              const LossWeights& weights, Rng& rng);

}  // namespace lanercnn
