#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lanercnn/losses.hpp"
#include "lanercnn/metrics.hpp"
#include "lanercnn/model.hpp"
#include "lanercnn/optim.hpp"

namespace lanercnn {

struct TrainConfig {
    int batch_size = 64;
    int epochs = 30;
    double lr = 0.01;
    int lr_decay_epoch = 20;     // 1-based; epochs >= this use lr * factor
    double lr_decay_factor = 0.1;
    double clip_norm = 10.0;     // <= 0 disables clipping
    bool augment = true;
    uint64_t seed = 0;
    LossWeights weights;
};

struct TrainLogEntry {
    int epoch = 0;
    int step = 0;  // global step
    double l_cls = 0.0;
    double l_reg = 0.0;
    double l_refine = 0.0;
    double lr = 0.0;

    std::string to_json_line() const;
};

struct TrainResult {
    std::vector<TrainLogEntry> log;
    int scenes_skipped = 0;
};

double lr_at_epoch(const TrainConfig& cfg, int epoch);

// Deterministic training loop: per step, normalize, augment, build rois,
// forward, loss, backward, clip, Adam. RNG streams derive from
// (seed, scene_id, epoch) so results do not depend on batch parallelism.
// A non-finite loss aborts with a diagnostic. `on_step` (when set) observes
// every log entry as it is produced.
TrainResult train(LaneRCNN& model, const std::vector<Scene>& dataset,
                  const TrainConfig& cfg,
                  const std::function<void(const TrainLogEntry&)>& on_step = {});

}  // namespace lanercnn
