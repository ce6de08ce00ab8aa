#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lanercnn/checkpoint.hpp"
#include "lanercnn/metrics.hpp"
#include "lanercnn/model.hpp"
#include "lanercnn/prediction.hpp"
#include "lanercnn/runconfig.hpp"
#include "lanercnn/svg_plot.hpp"
#include "lanercnn/synthetic.hpp"
#include "lanercnn/trainer.hpp"

namespace fs = std::filesystem;
using namespace lanercnn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitInvalidInput = 2;

void apply_threads(int threads) {
    if (threads <= 0) {
        if (const char* env = std::getenv("LANERCNN_THREADS"))
            threads = std::atoi(env);
    }
    if (threads > 0) omp_set_num_threads(threads);
}

RunConfig load_config(const std::string& path) {
    return path.empty() ? RunConfig{} : RunConfig::from_file(path);
}

std::vector<std::string> list_scene_files(const std::string& dir) {
    if (!fs::is_directory(dir))
        throw InvalidInputError("not a directory: " + dir);
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.starts_with("scene_") && name.ends_with(".json"))
            files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw InvalidInputError("no scene_*.json files in " + dir);
    return files;
}

std::vector<Scene> load_scenes(const std::string& dir) {
    std::vector<Scene> scenes;
    for (const auto& f : list_scene_files(dir)) scenes.push_back(read_scene(f));
    return scenes;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw InvalidInputError("cannot write " + path);
    f << text;
}

int cmd_gen(const std::string& config_path, const std::string& out,
            int count, uint64_t seed, bool force) {
    if (count <= 0) throw InvalidInputError("count must be positive");
    RunConfig cfg = load_config(config_path);
    cfg.seed = seed;

    if (fs::exists(out) && !fs::is_empty(out) && !force)
        throw InvalidInputError("output directory " + out +
                                " is not empty (use --force to overwrite)");
    fs::create_directories(out);

    nlohmann::ordered_json manifest;
    manifest["format_version"] = 1;
    manifest["seed"] = seed;
    manifest["count"] = count;
    manifest["files"] = nlohmann::ordered_json::array();
    for (int i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "scene_%04d.json", i);
        Rng rng = Rng(seed).fork(static_cast<uint64_t>(i));
        Scene scene = generate_synthetic_scene(cfg.generator, rng, name);
        const std::string text = scene_to_json(scene);
        write_text((fs::path(out) / name).string(), text);
        char digest[20];
        std::snprintf(digest, sizeof(digest), "%016llx",
                      static_cast<unsigned long long>(
                          fnv1a64(text.data(), text.size())));
        manifest["files"].push_back({{"name", name}, {"fnv64", digest}});
    }
    write_text((fs::path(out) / "manifest.json").string(),
               manifest.dump(2) + "\n");
    write_text((fs::path(out) / "config.json").string(), cfg.to_json());
    std::cout << "wrote " << count << " scenes to " << out << "\n";
    return kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& data,
              const std::string& out) {
    RunConfig cfg = load_config(config_path);
    auto scenes = load_scenes(data);
    fs::create_directories(out);
    write_text((fs::path(out) / "config.json").string(), cfg.to_json());

    LaneRCNN model(cfg.model, cfg.seed);
    std::ofstream log((fs::path(out) / "train_log.jsonl").string(),
                      std::ios::trunc);
    TrainResult result = train(model, scenes, cfg.training,
                               [&](const TrainLogEntry& e) {
                                   log << e.to_json_line() << "\n";
                                   log.flush();
                               });
    const std::string ckpt_path = (fs::path(out) / "checkpoint.bin").string();
    model.save(ckpt_path);

    MetricsReport train_metrics = evaluate_scenes(model, scenes);
    write_text((fs::path(out) / "metrics.json").string(), train_metrics.to_json());
    std::cout << "checkpoint: " << ckpt_path << "\n"
              << "steps: " << result.log.size()
              << ", skipped actors: " << result.scenes_skipped << "\n"
              << train_metrics.to_json();
    return kExitOk;
}

int cmd_eval(const std::string& checkpoint, const std::string& data) {
    auto model = LaneRCNN::load(checkpoint);
    auto scenes = load_scenes(data);
    std::cout << evaluate_scenes(*model, scenes).to_json();
    return kExitOk;
}

int cmd_predict(const std::string& checkpoint, const std::string& scene_path,
                const std::string& out) {
    auto model = LaneRCNN::load(checkpoint);
    Scene scene = read_scene(scene_path);
    PredictionFile pred;
    pred.scene_id = scene.scene_id;
    pred.actor_id = scene.agent().actor_id;
    pred.modes = predict_agent(*model, scene);
    write_prediction(pred, out);
    std::cout << "wrote " << pred.modes.size() << " modes to " << out << "\n";
    return kExitOk;
}

int cmd_plot(const std::string& prediction_path, const std::string& scene_path,
             const std::string& out) {
    Scene scene = read_scene(scene_path);
    PredictionFile pred = read_prediction(prediction_path);
    std::string warning;
    const std::string svg = render_scene_svg(scene, pred, &warning);
    if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
    write_text(out, svg);
    std::cout << "wrote " << out << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LaneRCNN motion forecasting pipeline"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads,
                   "cap OpenMP worker count (env LANERCNN_THREADS as fallback)");

    std::string config_path, out, data, checkpoint, scene_path, prediction_path;
    int count = 0;
    uint64_t seed = 7;
    bool force = false;

    auto* gen = app.add_subcommand("gen", "generate synthetic scenes");
    gen->add_option("--config", config_path, "run config JSON");
    gen->add_option("--out", out, "output directory")->required();
    gen->add_option("--count", count, "number of scenes")->required();
    gen->add_option("--seed", seed, "generator seed");
    gen->add_flag("--force", force, "overwrite a non-empty output directory");

    auto* tr = app.add_subcommand("train", "train a model");
    tr->add_option("--config", config_path, "run config JSON");
    tr->add_option("--data", data, "scene directory")->required();
    tr->add_option("--out", out, "output directory")->required();

    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
    ev->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    ev->add_option("--data", data, "scene directory")->required();

    auto* pr = app.add_subcommand("predict", "predict one scene's agent");
    pr->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    pr->add_option("--scene", scene_path, "scene JSON file")->required();
    pr->add_option("--out", out, "prediction output file")->required();

    auto* pl = app.add_subcommand("plot", "render a prediction as SVG");
    pl->add_option("--prediction", prediction_path, "prediction JSON")->required();
    pl->add_option("--scene", scene_path, "scene JSON file")->required();
    pl->add_option("--out", out, "SVG output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitInvalidInput;
    }

    try {
        apply_threads(threads);
        if (gen->parsed()) return cmd_gen(config_path, out, count, seed, force);
        if (tr->parsed()) return cmd_train(config_path, data, out);
        if (ev->parsed()) return cmd_eval(checkpoint, data);
        if (pr->parsed()) return cmd_predict(checkpoint, scene_path, out);
        if (pl->parsed()) return cmd_plot(prediction_path, scene_path, out);
        return kExitInvalidInput;
    } catch (const InvalidInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
