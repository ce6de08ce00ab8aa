#pragma once

#include <string>

#include "lanercnn/prediction.hpp"
#include "lanercnn/scene.hpp"

namespace lanercnn {

// Static SVG of the map, the agent's past/ground-truth tracks, and predicted
// modes with per-mode colors and score labels. Throws ConfigMismatchError
// when the prediction's scene_id does not match; an empty mode list renders
// the map only and returns a warning via the optional out-parameter.
std::string render_scene_svg(const Scene& scene, const PredictionFile& prediction,
                             std::string* warning = nullptr);

}  // namespace lanercnn
