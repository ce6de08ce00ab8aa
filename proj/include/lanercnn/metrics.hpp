#pragma once

#include <string>
#include <vector>

#include "lanercnn/model.hpp"

namespace lanercnn {

struct MetricSet {
    double min_ade = 0.0;
    double min_fde = 0.0;
    double miss_rate = 0.0;
};

struct MetricsReport {
    MetricSet k1;
    MetricSet k6;
    int scenes = 0;

    std::string to_json() const;
};

// Best-of-K displacement metrics over agents: minADE picks the mode with the
// lowest average error, minFDE/MR the one with the lowest final error; a
// final error of exactly miss_threshold still counts as a miss. Modes must
// be score-ordered; K=1 therefore reads the top-scored mode.
MetricSet compute_metrics(
    const std::vector<std::vector<ModeOutput>>& predictions,
    const std::vector<std::vector<Vec2>>& ground_truth, int k,
    double miss_threshold = 2.0);

// Runs the full pipeline over every scene's agent and reports K in {1, 6}
// (clamped to the model's mode count).
MetricsReport evaluate_scenes(const LaneRCNN& model,
                              const std::vector<Scene>& scenes);

}  // namespace lanercnn
