#pragma once

#include <string>

#include "lanercnn/model.hpp"
#include "lanercnn/synthetic.hpp"
#include "lanercnn/trainer.hpp"

namespace lanercnn {

// One canonical JSON file carrying every module config plus the seed. CLI
// flags override individual fields; the resolved config is echoed into the
// output directory of commands that produce artifacts.
struct RunConfig {
    uint64_t seed = 7;
    GeneratorConfig generator;
    LaneRCNNConfig model;
    TrainConfig training;

    std::string to_json() const;
    static RunConfig from_json(const std::string& text);
    static RunConfig from_file(const std::string& path);
};

}  // namespace lanercnn
