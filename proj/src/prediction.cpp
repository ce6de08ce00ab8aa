#include "lanercnn/prediction.hpp"

#include <fstream>

#include <json.hpp>

namespace lanercnn {

using ordered_json = nlohmann::ordered_json;

std::string prediction_to_json(const PredictionFile& pred) {
    ordered_json j;
    j["scene_id"] = pred.scene_id;
    j["actor_id"] = pred.actor_id;
    j["modes"] = ordered_json::array();
    for (const auto& m : pred.modes) {
        ordered_json jm;
        jm["score"] = m.score;
        jm["waypoints"] = ordered_json::array();
        for (const auto& p : m.waypoints)
            jm["waypoints"].push_back(ordered_json::array({p.x, p.y}));
        j["modes"].push_back(std::move(jm));
    }
    return j.dump(2) + "\n";
}

PredictionFile prediction_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed prediction JSON: ") + e.what());
    }
    PredictionFile pred;
    if (!j.contains("scene_id")) throw SchemaError("missing field scene_id");
    if (!j.contains("actor_id")) throw SchemaError("missing field actor_id");
    if (!j.contains("modes")) throw SchemaError("missing field modes");
    pred.scene_id = j["scene_id"].get<std::string>();
    pred.actor_id = j["actor_id"].get<int>();
    for (const auto& jm : j["modes"]) {
        ModeOutput m;
        m.score = jm.at("score").get<double>();
        for (const auto& p : jm.at("waypoints"))
            m.waypoints.emplace_back(p[0].get<double>(), p[1].get<double>());
        pred.modes.push_back(std::move(m));
    }
    return pred;
}

PredictionFile read_prediction(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInputError("cannot open prediction file: " + path);
    std::string text((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
    return prediction_from_json(text);
}

void write_prediction(const PredictionFile& pred, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw InvalidInputError("cannot open prediction file for writing: " + path);
    f << prediction_to_json(pred);
    if (!f) throw RuntimeFailure("failed writing prediction file: " + path);
}

}  // namespace lanercnn
