#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poselift/config.hpp"
#include "poselift/tracking.hpp"

namespace poselift {

/// Tracks file: a header line `{"header": {...}}` followed by one JSON object
/// per track, `{"id", "birth", "states": [{"frame", "kind", "box3d", "pose3d"}]}`.
/// box3d is [x_min, x_max, y_min, y_max, z_min, z_max]; pose3d rows are [X, Y, Z, conf].
/// Ground-truth files share the schema, with "id" the person id.
void write_tracks(std::ostream& out, std::span<const Track> tracks, const EngineConfig& cfg);

/// Header carrying only engine identity and skeleton (ground-truth files).
void write_tracks_minimal(std::ostream& out, std::span<const Track> tracks, const std::string& skeleton_id);

struct TrackFile {
    std::string skeleton_id{kDefaultSkeleton};
    std::optional<std::string> header;  // raw header JSON, if present
    std::vector<Track> tracks;
};

TrackFile read_tracks(std::istream& in, const std::string& source);
TrackFile load_tracks(const std::filesystem::path& path);

}  // namespace poselift
