#include "lanercnn/metrics.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

namespace lanercnn {

MetricSet compute_metrics(
    const std::vector<std::vector<ModeOutput>>& predictions,
    const std::vector<std::vector<Vec2>>& ground_truth, int k,
    double miss_threshold) {
    if (predictions.size() != ground_truth.size())
        throw InvalidInputError("metrics: prediction/GT count mismatch");
    if (predictions.empty())
        throw InvalidInputError("metrics: empty evaluation set");

    double sum_ade = 0.0, sum_fde = 0.0;
    int misses = 0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        const auto& modes = predictions[i];
        const auto& gt = ground_truth[i];
        if (static_cast<int>(modes.size()) < k)
            throw InvalidInputError("metrics: fewer than K predictions");
        double best_ade = std::numeric_limits<double>::infinity();
        double best_fde = std::numeric_limits<double>::infinity();
        for (int m = 0; m < k; ++m) {
            const auto& wp = modes[static_cast<size_t>(m)].waypoints;
            if (wp.size() != gt.size())
                throw InvalidInputError("metrics: waypoint/GT length mismatch");
            double ade = 0.0;
            for (size_t t = 0; t < wp.size(); ++t)
                ade += (wp[t] - gt[t]).norm();
            ade /= static_cast<double>(wp.size());
            const double fde = (wp.back() - gt.back()).norm();
            best_ade = std::min(best_ade, ade);
            best_fde = std::min(best_fde, fde);
        }
        sum_ade += best_ade;
        sum_fde += best_fde;
        if (best_fde >= miss_threshold) ++misses;
    }
    const double n = static_cast<double>(predictions.size());
    return {sum_ade / n, sum_fde / n, static_cast<double>(misses) / n};
}

std::string MetricsReport::to_json() const {
    nlohmann::ordered_json j;
    j["minADE_1"] = k1.min_ade;
    j["minFDE_1"] = k1.min_fde;
    j["MR_1"] = k1.miss_rate;
    j["minADE_6"] = k6.min_ade;
    j["minFDE_6"] = k6.min_fde;
    j["MR_6"] = k6.miss_rate;
    j["scenes"] = scenes;
    return j.dump(2) + "\n";
}

MetricsReport evaluate_scenes(const LaneRCNN& model,
                              const std::vector<Scene>& scenes) {
    std::vector<std::vector<ModeOutput>> preds;
    std::vector<std::vector<Vec2>> gts;
    for (const auto& scene : scenes) {
        const ActorTrack& agent = scene.agent();
        if (!agent.future)
            throw InvalidInputError("evaluation scene lacks agent future: " +
                                    scene.scene_id);
        preds.push_back(predict_agent(model, scene));
        gts.push_back(*agent.future);
    }
    MetricsReport rep;
    rep.scenes = static_cast<int>(scenes.size());
    rep.k1 = compute_metrics(preds, gts, 1);
    rep.k6 = compute_metrics(preds, gts,
                             std::min(6, model.config().num_modes));
    return rep;
}

}  // namespace lanercnn
