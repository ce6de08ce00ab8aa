#include "lanercnn/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lanercnn {

namespace {

const char* kModeColors[] = {"#e41a1c", "#377eb8", "#4daf4a",
                             "#984ea3", "#ff7f00", "#a65628",
                             "#f781bf", "#999999"};

struct Bounds {
    double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
    void add(const Vec2& p) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
};

}  // namespace

std::string render_scene_svg(const Scene& scene, const PredictionFile& prediction,
                             std::string* warning) {
    if (prediction.scene_id != scene.scene_id)
        throw ConfigMismatchError("prediction scene_id '" + prediction.scene_id +
                                  "' does not match scene '" + scene.scene_id + "'");

    Bounds b;
    for (const auto& l : scene.lanes)
        for (const auto& p : l.polyline) b.add(p);
    for (const auto& a : scene.actors) {
        for (const auto& p : a.past) b.add(p);
        if (a.future)
            for (const auto& p : *a.future) b.add(p);
    }
    for (const auto& m : prediction.modes)
        for (const auto& p : m.waypoints) b.add(p);

    const double margin = 5.0;
    const double w = b.max_x - b.min_x + 2 * margin;
    const double h = b.max_y - b.min_y + 2 * margin;
    // SVG y grows downward; map scene y so north stays up.
    auto fx = [&](double x) { return x - b.min_x + margin; };
    auto fy = [&](double y) { return b.max_y - y + margin; };

    std::ostringstream svg;
    svg.precision(6);
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << w
        << " " << h << "\" width=\"800\" height=\"" << 800.0 * h / w << "\">\n";
    svg << "  <rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h
        << "\" fill=\"#fafafa\"/>\n";

    auto polyline = [&](const std::vector<Vec2>& pts, const std::string& style) {
        svg << "  <polyline points=\"";
        for (size_t i = 0; i < pts.size(); ++i) {
            if (i) svg << " ";
            svg << fx(pts[i].x) << "," << fy(pts[i].y);
        }
        svg << "\" fill=\"none\" " << style << "/>\n";
    };

    for (const auto& l : scene.lanes)
        polyline(l.polyline,
                 "stroke=\"#c8c8c8\" stroke-width=\"0.4\" stroke-dasharray=\"1.5,1\"");

    for (const auto& a : scene.actors) {
        const bool is_target = a.actor_id == prediction.actor_id;
        polyline(a.past, std::string("stroke=\"") + (is_target ? "#1f3d99" : "#8899bb") +
                             "\" stroke-width=\"0.5\"");
        if (a.future)
            polyline(*a.future, std::string("stroke=\"") +
                                    (is_target ? "#1a9641" : "#a6d96a") +
                                    "\" stroke-width=\"0.5\"");
    }

    if (prediction.modes.empty() && warning)
        *warning = "prediction has no modes; rendering map only";

    for (size_t m = 0; m < prediction.modes.size(); ++m) {
        const char* color = kModeColors[m % (sizeof(kModeColors) / sizeof(char*))];
        std::ostringstream style;
        style << "stroke=\"" << color << "\" stroke-width=\"0.45\" stroke-opacity=\"0.9\"";
        if (m % 2 == 1) style << " stroke-dasharray=\"0.8,0.5\"";
        polyline(prediction.modes[m].waypoints, style.str());
        svg << "  <text x=\"" << margin * 0.4 << "\" y=\""
            << margin * 0.4 + 2.2 * (static_cast<double>(m) + 1)
            << "\" font-size=\"1.8\" fill=\"" << color << "\">mode " << m
            << " score " << prediction.modes[m].score << "</text>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

}  // namespace lanercnn
