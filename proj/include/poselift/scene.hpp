#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "poselift/tracking.hpp"

namespace poselift {

struct SceneMetadata {
    double fps = 25.0;
    std::string skeleton_id{kDefaultSkeleton};
    std::string units = "meters";
    std::string engine_version;
    std::vector<std::string> joint_names;

    bool operator==(const SceneMetadata&) const = default;
};

struct SceneSample {
    std::int64_t frame = 0;
    bool predicted = false;
    std::vector<Point3> joints;

    bool operator==(const SceneSample&) const = default;
};

struct SceneActor {
    std::int64_t track_id = 0;
    std::int64_t birth_frame = 0;
    std::vector<SceneSample> samples;  // contiguous frames from birth_frame

    bool operator==(const SceneActor&) const = default;
};

/// Renderer-agnostic animation document: one actor per track, one sample per
/// track state.
struct SceneDocument {
    SceneMetadata metadata;
    std::vector<SceneActor> actors;

    bool operator==(const SceneDocument&) const = default;
};

/// Checks sample contiguity and that every sample has the skeleton's arity.
void validate(const SceneDocument& doc);

/// Throws ValidationError when a pose does not match the skeleton's arity.
SceneDocument export_scene(std::span<const Track> tracks, double fps, std::string_view skeleton_id);

/// Doubles are written with round-trip precision, so parse_scene(scene_to_json(d)) == d.
std::string scene_to_json(const SceneDocument& doc);
SceneDocument parse_scene(std::string_view text, const std::string& source = "scene");
void save_scene(const std::filesystem::path& path, const SceneDocument& doc);
SceneDocument load_scene(const std::filesystem::path& path);

}  // namespace poselift
