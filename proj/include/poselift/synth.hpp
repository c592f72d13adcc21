#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "poselift/ingest.hpp"
#include "poselift/metrics.hpp"
#include "poselift/tracking.hpp"

namespace poselift::synth {

/// Root (pelvis) position at a frame. Paths interpolate linearly between
/// waypoints and hold their end points outside them.
struct Waypoint {
    double frame = 0.0;
    Point3 root;
};

/// A person is an upright cuboid: x in [X - w/2, X + w/2], y in
/// [Y - h/2, Y + h/2], z in [Z, Z + d] for root (X, Y, Z). The root and all
/// joints sit on the front (camera-facing) face.
struct PersonSpec {
    std::vector<Waypoint> path;
    Point3 extent{0.5, 1.7, 0.3};  // (w, h, d)
    double score = 0.9;
};

/// Person `person` is not detected in frames first..last (inclusive).
struct Dropout {
    std::size_t person = 0;
    std::int64_t first = 0;
    std::int64_t last = 0;
};

struct NoiseSpec {
    double depth_sigma = 0.0;     // meters
    double keypoint_sigma = 0.0;  // pixels
};

struct Scenario {
    std::string name;
    std::vector<PersonSpec> persons;
    std::int64_t frames = 0;
    double fps = 25.0;
    CameraModel camera{400.0, 400.0, 320.0, 240.0, 1.0};
    int width = 640;
    int height = 480;
    std::vector<Dropout> dropouts;
    NoiseSpec noise;
    std::uint64_t seed = 0;
};

void validate(const Scenario& sc);

Point3 root_at(const PersonSpec& person, std::int64_t frame);
Box3D body_box(const PersonSpec& person, std::int64_t frame);
/// Exact 3D joints (confidence 1) in the default skeleton order.
Pose3D body_pose(const PersonSpec& person, std::int64_t frame);

struct Rendered {
    SequenceInput sequence;
    /// One ground-truth track per person, id = person index, every frame.
    std::vector<Track> gt_tracks;
    GroundTruth ground_truth;
    /// Per frame, which person each detection came from.
    std::vector<std::vector<std::size_t>> detection_owner;
};

/// Renders every frame: per-pixel nearest-surface depth of the person
/// cuboids, masks of the pixels each person owns, projected-extent boxes and
/// projected canonical keypoints. Persons that own no pixel in a frame, or
/// are dropped out, yield no detection. Deterministic for a fixed seed.
/// Throws ScenarioError when a person reaches Z <= 0.
Rendered generate(const Scenario& sc);

/// Names accepted by builtin().
std::vector<std::string> builtin_names();

/// parallel_walk, depth_cross, full_occlusion, three_person_mix.
/// Throws UnknownName.
Scenario builtin(std::string_view name);

/// full_occlusion with a chosen dropout length.
Scenario full_occlusion(std::int64_t gap);

std::string scenario_to_json(const Scenario& sc);
Scenario parse_scenario(std::string_view text, const std::string& source = "scenario");
Scenario load_scenario(const std::filesystem::path& path);

/// Writes detections.jsonl, depth/<frame>.dpt, gt.jsonl, scenario.json and
/// config.json (camera and defaults) into `dir`.
void write_dataset(const Scenario& sc, const Rendered& r, const std::filesystem::path& dir);

}  // namespace poselift::synth
