#include "poselift/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "poselift/error.hpp"

namespace poselift {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

std::map<std::string, double> read_params(const json& j) {
    std::map<std::string, double> out;
    if (auto it = j.find("parameters"); it != j.end())
        for (const auto& [k, v] : it->items()) out[k] = v.get<double>();
    return out;
}

ordered_json params_json(const std::map<std::string, double>& params) {
    ordered_json out = ordered_json::object();
    for (const auto& [k, v] : params) out[k] = v;
    return out;
}

}  // namespace

void validate(const EngineConfig& cfg) {
    validate(cfg.camera);
    if (!(cfg.fps > 0.0)) throw ValidationError("config.fps: must be positive");
    skeleton(cfg.skeleton);
    validate(cfg.tracker);
    if (!(cfg.lifting.options.min_thickness >= 0.0))
        throw ValidationError("config.lifting.min_thickness: negative");
    if (!(cfg.lifting.options.depth_percentile >= 0.0 && cfg.lifting.options.depth_percentile < 50.0))
        throw ValidationError("config.lifting.depth_percentile: outside [0,50)");
    if (!(cfg.metrics.radius > 0.0)) throw ValidationError("config.metrics.radius: must be positive");
    if (!(cfg.metrics.tau > 0.0)) throw ValidationError("config.metrics.tau: must be positive");
}

EngineConfig parse_config(std::string_view text, const std::string& source) {
    EngineConfig cfg;
    try {
        const json j = json::parse(text);
        const json& cam = j.at("camera");
        cfg.camera.fx = cam.at("fx").get<double>();
        cfg.camera.fy = cam.at("fy").get<double>();
        cfg.camera.cx = cam.at("cx").get<double>();
        cfg.camera.cy = cam.at("cy").get<double>();
        read_opt(cam, "world_scale", cfg.camera.world_scale);
        read_opt(j, "fps", cfg.fps);
        read_opt(j, "skeleton", cfg.skeleton);

        if (auto it = j.find("lifting"); it != j.end()) {
            read_opt(*it, "min_thickness", cfg.lifting.options.min_thickness);
            read_opt(*it, "depth_percentile", cfg.lifting.options.depth_percentile);
            if (auto l = it->find("lifter"); l != it->end()) {
                read_opt(*l, "name", cfg.lifting.lifter.name);
                cfg.lifting.lifter.parameters = read_params(*l);
            }
        }
        if (auto it = j.find("tracker"); it != j.end()) {
            auto& t = cfg.tracker;
            read_opt(*it, "iou_gate", t.iou_gate);
            read_opt(*it, "max_gap", t.max_gap);
            read_opt(*it, "predictor_window", t.predictor_window);
            read_opt(*it, "min_track_score", t.min_track_score);
            if (auto m = it->find("association_mode"); m != it->end())
                t.association_mode = parse_association_mode(m->get<std::string>());
            if (auto p = it->find("predictor"); p != it->end()) {
                read_opt(*p, "name", t.predictor.name);
                t.predictor.parameters = read_params(*p);
            }
        }
        if (auto it = j.find("metrics"); it != j.end()) {
            read_opt(*it, "radius", cfg.metrics.radius);
            read_opt(*it, "tau", cfg.metrics.tau);
        }
    } catch (const json::exception& e) {
        throw ParseError(source, 0, e.what());
    }
    try {
        validate(cfg);
    } catch (const Error& e) {
        throw ValidationError(source + ": " + e.what());
    }
    return cfg;
}

EngineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(path.string() + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

std::string config_to_json(const EngineConfig& cfg) {
    ordered_json j;
    j["camera"] = {{"fx", cfg.camera.fx},
                   {"fy", cfg.camera.fy},
                   {"cx", cfg.camera.cx},
                   {"cy", cfg.camera.cy},
                   {"world_scale", cfg.camera.world_scale}};
    j["fps"] = cfg.fps;
    j["skeleton"] = cfg.skeleton;
    j["lifting"] = {{"min_thickness", cfg.lifting.options.min_thickness},
                    {"depth_percentile", cfg.lifting.options.depth_percentile},
                    {"lifter", {{"name", cfg.lifting.lifter.name},
                                {"parameters", params_json(cfg.lifting.lifter.parameters)}}}};
    const auto& t = cfg.tracker;
    j["tracker"] = {{"iou_gate", t.iou_gate},
                    {"max_gap", t.max_gap},
                    {"predictor_window", t.predictor_window},
                    {"association_mode", to_string(t.association_mode)},
                    {"min_track_score", t.min_track_score},
                    {"predictor", {{"name", t.predictor.name}, {"parameters", params_json(t.predictor.parameters)}}}};
    j["metrics"] = {{"radius", cfg.metrics.radius}, {"tau", cfg.metrics.tau}};
    return j.dump(2);
}

}  // namespace poselift
