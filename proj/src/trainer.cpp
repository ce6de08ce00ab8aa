#include "lanercnn/trainer.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace lanercnn {

std::string TrainLogEntry::to_json_line() const {
    std::ostringstream os;
    os.precision(10);
    os << "{\"epoch\": " << epoch << ", \"step\": " << step
       << ", \"l_cls\": " << l_cls << ", \"l_reg\": " << l_reg
       << ", \"l_refine\": " << l_refine << ", \"lr\": " << lr << "}";
    return os.str();
}

double lr_at_epoch(const TrainConfig& cfg, int epoch) {
    return epoch >= cfg.lr_decay_epoch ? cfg.lr * cfg.lr_decay_factor : cfg.lr;
}

TrainResult train(LaneRCNN& model, const std::vector<Scene>& dataset,
                  const TrainConfig& cfg,
                  const std::function<void(const TrainLogEntry&)>& on_step) {
    if (dataset.empty()) throw InvalidInputError("training dataset is empty");

    TrainResult result;
    AdamState adam = AdamState::init_for(model.params());
    AdamConfig adam_cfg;
    int global_step = 0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        adam_cfg.lr = lr_at_epoch(cfg, epoch);

        std::vector<size_t> order(dataset.size());
        std::iota(order.begin(), order.end(), 0);
        Rng epoch_rng = Rng(cfg.seed).fork(0x0e70c000ULL + static_cast<uint64_t>(epoch));
        for (size_t i = 0; i + 1 < order.size(); ++i) {
            const size_t j = i + epoch_rng.uniform_int(order.size() - i);
            std::swap(order[i], order[j]);
        }

        for (size_t start = 0; start < order.size();
             start += static_cast<size_t>(cfg.batch_size)) {
            const size_t end =
                std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
            model.params().zero_grads();

            double sum_cls = 0.0, sum_reg = 0.0, sum_refine = 0.0;
            int contributing = 0;

            std::vector<size_t> batch(order.begin() + static_cast<int64_t>(start),
                                      order.begin() + static_cast<int64_t>(end));
            for (size_t idx : batch) {
                const Scene& raw = dataset[idx];
                Rng scene_rng = Rng(cfg.seed).fork(
                    hash_string(raw.scene_id) ^ (static_cast<uint64_t>(epoch) << 32));

                auto [normalized, frame] = normalize_scene(raw);
                (void)frame;
                Scene input = cfg.augment ? augment_rotation(normalized, scene_rng)
                                          : normalized;

                ad::Tape tape;
                SceneForward fwd = model.forward_scene(input);
                SceneLossBreakdown loss =
                    scene_loss(model, fwd, input, cfg.weights, scene_rng);
                result.scenes_skipped += loss.actors_skipped;
                if (loss.actors_used == 0) continue;

                const double value = loss.total.item();
                if (!std::isfinite(value))
                    throw RuntimeFailure(
                        "non-finite loss at epoch " + std::to_string(epoch) +
                        ", scene " + raw.scene_id + " (cls " +
                        std::to_string(loss.l_cls) + ", reg " +
                        std::to_string(loss.l_reg) + ", refine " +
                        std::to_string(loss.l_refine) + ")");

                sum_cls += loss.l_cls;
                sum_reg += loss.l_reg;
                sum_refine += loss.l_refine;
                ++contributing;
                tape.backward(loss.total);
            }
            if (contributing == 0) continue;

            // Mean over contributing scenes.
            const double inv = 1.0 / static_cast<double>(contributing);
            for (auto& p : model.params().tensors())
                for (double& g : p.grad()) g *= inv;

            clip_grad_norm(model.params(), cfg.clip_norm);
            adam_step(model.params(), adam, adam_cfg);

            TrainLogEntry entry;
            entry.epoch = epoch;
            entry.step = ++global_step;
            entry.l_cls = sum_cls * inv;
            entry.l_reg = sum_reg * inv;
            entry.l_refine = sum_refine * inv;
            entry.lr = adam_cfg.lr;
            if (on_step) on_step(entry);
            result.log.push_back(entry);
        }
    }
    return result;
}

}  // namespace lanercnn
