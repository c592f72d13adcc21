#include "poselift/scene.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "poselift/config.hpp"
#include "poselift/error.hpp"

namespace poselift {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void validate(const SceneDocument& doc) {
    const SkeletonDef def = skeleton(doc.metadata.skeleton_id);
    if (!(doc.metadata.fps > 0.0)) throw ValidationError("SceneDocument.fps: must be positive");
    if (doc.metadata.joint_names != def.joint_names)
        throw ValidationError("SceneDocument.joint_names: do not match skeleton '" + def.id + "'");
    for (const SceneActor& a : doc.actors) {
        const std::string where = "actor " + std::to_string(a.track_id);
        for (std::size_t k = 0; k < a.samples.size(); ++k) {
            const SceneSample& s = a.samples[k];
            if (s.frame != a.birth_frame + static_cast<std::int64_t>(k))
                throw ValidationError(where + ": sample frames not contiguous at frame " + std::to_string(s.frame));
            if (s.joints.size() != def.joint_count())
                throw ValidationError(where + ", frame " + std::to_string(s.frame) + ": " +
                                      std::to_string(s.joints.size()) + " joints, skeleton '" + def.id +
                                      "' has " + std::to_string(def.joint_count()));
        }
    }
}

SceneDocument export_scene(std::span<const Track> tracks, double fps, std::string_view skeleton_id) {
    const SkeletonDef def = skeleton(skeleton_id);
    SceneDocument doc;
    doc.metadata.fps = fps;
    doc.metadata.skeleton_id = def.id;
    doc.metadata.engine_version = std::string(kEngineVersion);
    doc.metadata.joint_names = def.joint_names;
    for (const Track& t : tracks) {
        SceneActor actor{t.track_id, t.birth_frame, {}};
        actor.samples.reserve(t.states.size());
        for (const TrackState& s : t.states) {
            if (s.pose.joints.size() != def.joint_count())
                throw ValidationError("track " + std::to_string(t.track_id) + ", frame " + std::to_string(s.frame) +
                                      ": pose has " + std::to_string(s.pose.joints.size()) +
                                      " joints, skeleton '" + def.id + "' has " +
                                      std::to_string(def.joint_count()));
            SceneSample sample{s.frame, s.kind == StateKind::Predicted, {}};
            sample.joints.reserve(s.pose.joints.size());
            for (const Joint3D& j : s.pose.joints) sample.joints.push_back(j.position());
            actor.samples.push_back(std::move(sample));
        }
        doc.actors.push_back(std::move(actor));
    }
    validate(doc);
    return doc;
}

std::string scene_to_json(const SceneDocument& doc) {
    ordered_json meta;
    meta["fps"] = doc.metadata.fps;
    meta["skeleton"] = doc.metadata.skeleton_id;
    meta["units"] = doc.metadata.units;
    meta["engine"] = kEngineName;
    meta["version"] = doc.metadata.engine_version;
    meta["joints"] = doc.metadata.joint_names;
    ordered_json actors = ordered_json::array();
    for (const SceneActor& a : doc.actors) {
        ordered_json samples = ordered_json::array();
        for (const SceneSample& s : a.samples) {
            ordered_json joints = ordered_json::array();
            for (const Point3& p : s.joints) joints.push_back({p.x, p.y, p.z});
            samples.push_back(
                {{"frame", s.frame}, {"state", s.predicted ? "predicted" : "observed"}, {"joints", std::move(joints)}});
        }
        ordered_json actor;
        actor["track_id"] = a.track_id;
        actor["birth"] = a.birth_frame;
        actor["samples"] = std::move(samples);
        actors.push_back(std::move(actor));
    }
    ordered_json root;
    root["metadata"] = std::move(meta);
    root["actors"] = std::move(actors);
    return root.dump(1) + "\n";
}

SceneDocument parse_scene(std::string_view text, const std::string& source) {
    SceneDocument doc;
    try {
        const json root = json::parse(text);
        const json& meta = root.at("metadata");
        doc.metadata.fps = meta.at("fps").get<double>();
        doc.metadata.skeleton_id = meta.at("skeleton").get<std::string>();
        doc.metadata.units = meta.at("units").get<std::string>();
        doc.metadata.engine_version = meta.at("version").get<std::string>();
        doc.metadata.joint_names = meta.at("joints").get<std::vector<std::string>>();
        for (const json& a : root.at("actors")) {
            SceneActor actor{a.at("track_id").get<std::int64_t>(), a.at("birth").get<std::int64_t>(), {}};
            for (const json& s : a.at("samples")) {
                const std::string state = s.at("state").get<std::string>();
                if (state != "observed" && state != "predicted")
                    throw ValidationError("unknown sample state '" + state + "'");
                SceneSample sample{s.at("frame").get<std::int64_t>(), state == "predicted", {}};
                for (const json& p : s.at("joints")) {
                    if (p.size() != 3) throw ValidationError("joint rows must have 3 coordinates");
                    sample.joints.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
                }
                actor.samples.push_back(std::move(sample));
            }
            doc.actors.push_back(std::move(actor));
        }
    } catch (const json::exception& e) {
        throw ParseError(source, 0, e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(source + ": " + e.what());
    }
    validate(doc);
    return doc;
}

void save_scene(const std::filesystem::path& path, const SceneDocument& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << scene_to_json(doc);
    if (!out) throw Error("write failed: " + path.string());
}

SceneDocument load_scene(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scene(ss.str(), path.string());
}

}  // namespace poselift
