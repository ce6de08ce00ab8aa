#pragma once

#include <string>
#include <vector>

#include "lanercnn/model.hpp"

namespace lanercnn {

// Prediction output file: modes for one actor in the original scene frame.
struct PredictionFile {
    std::string scene_id;
    int actor_id = 0;
    std::vector<ModeOutput> modes;
};

std::string prediction_to_json(const PredictionFile& pred);
PredictionFile prediction_from_json(const std::string& text);
PredictionFile read_prediction(const std::string& path);
void write_prediction(const PredictionFile& pred, const std::string& path);

}  // namespace lanercnn
