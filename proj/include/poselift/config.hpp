#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "poselift/ingest.hpp"
#include "poselift/tracking.hpp"

namespace poselift {

inline constexpr std::string_view kEngineName = "poselift";
inline constexpr std::string_view kEngineVersion = "0.1.0";

struct MetricsConfig {
    /// GT/prediction root-distance gate for CLEAR-MOT matching, meters.
    double radius = 0.5;
    /// 3DPCK threshold, meters.
    double tau = 0.15;
};

/// Everything a run needs besides the data: camera, lifting, tracking and
/// evaluation parameters. Missing keys keep their defaults; `camera` is required.
struct EngineConfig {
    CameraModel camera;
    double fps = 25.0;
    std::string skeleton{kDefaultSkeleton};
    LiftingConfig lifting;
    TrackerConfig tracker;
    MetricsConfig metrics;
};

void validate(const EngineConfig& cfg);

EngineConfig parse_config(std::string_view text, const std::string& source = "config");
EngineConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const EngineConfig& cfg);

}  // namespace poselift
