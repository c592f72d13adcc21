#include "poselift/track_io.hpp"

#include <fstream>

#include <json.hpp>

#include "poselift/error.hpp"

namespace poselift {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json track_json(const Track& track) {
    ordered_json states = ordered_json::array();
    for (const TrackState& s : track.states) {
        ordered_json pose = ordered_json::array();
        for (const Joint3D& j : s.pose.joints) pose.push_back({j.x, j.y, j.z, j.confidence});
        const Box3D& b = s.box3d;
        states.push_back({{"frame", s.frame},
                          {"kind", s.kind == StateKind::Observed ? "obs" : "pred"},
                          {"box3d", {b.x_min, b.x_max, b.y_min, b.y_max, b.z_min, b.z_max}},
                          {"pose3d", std::move(pose)}});
    }
    ordered_json j;
    j["id"] = track.track_id;
    j["birth"] = track.birth_frame;
    j["states"] = std::move(states);
    return j;
}

void write_body(std::ostream& out, std::span<const Track> tracks) {
    for (const Track& t : tracks) out << track_json(t).dump() << '\n';
}

}  // namespace

void write_tracks(std::ostream& out, std::span<const Track> tracks, const EngineConfig& cfg) {
    ordered_json header;
    header["engine"] = kEngineName;
    header["version"] = kEngineVersion;
    header["skeleton"] = cfg.skeleton;
    ordered_json full = ordered_json::parse(config_to_json(cfg));
    header["tracker"] = full["tracker"];
    header["lifting"] = full["lifting"];
    header["camera"] = full["camera"];
    header["fps"] = cfg.fps;
    out << ordered_json{{"header", header}}.dump() << '\n';
    write_body(out, tracks);
}

void write_tracks_minimal(std::ostream& out, std::span<const Track> tracks, const std::string& skeleton_id) {
    ordered_json header;
    header["engine"] = kEngineName;
    header["version"] = kEngineVersion;
    header["skeleton"] = skeleton_id;
    out << ordered_json{{"header", header}}.dump() << '\n';
    write_body(out, tracks);
}

TrackFile read_tracks(std::istream& in, const std::string& source) {
    TrackFile file;
    std::string line;
    std::size_t line_no = 0;
    std::vector<json> records;
    std::vector<std::size_t> record_lines;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(source, line_no, e.what());
        }
        if (j.contains("header")) {
            if (file.header) throw ParseError(source, line_no, "second header line");
            file.header = j["header"].dump();
            if (auto s = j["header"].find("skeleton"); s != j["header"].end()) file.skeleton_id = s->get<std::string>();
            continue;
        }
        records.push_back(std::move(j));
        record_lines.push_back(line_no);
    }

    const SkeletonDef def = skeleton(file.skeleton_id);
    for (std::size_t r = 0; r < records.size(); ++r) {
        const json& j = records[r];
        const std::size_t ln = record_lines[r];
        Track track;
        try {
            track.track_id = j.at("id").get<std::int64_t>();
            track.birth_frame = j.at("birth").get<std::int64_t>();
            for (const auto& s : j.at("states")) {
                TrackState st;
                st.frame = s.at("frame").get<std::int64_t>();
                const auto kind = s.at("kind").get<std::string>();
                if (kind == "obs")
                    st.kind = StateKind::Observed;
                else if (kind == "pred")
                    st.kind = StateKind::Predicted;
                else
                    throw ParseError(source, ln, "state kind must be obs or pred, got '" + kind + "'");
                const auto& b = s.at("box3d");
                if (b.size() != 6) throw ParseError(source, ln, "box3d needs 6 numbers");
                st.box3d = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                            b[3].get<double>(), b[4].get<double>(), b[5].get<double>()};
                st.pose.skeleton_id = def.id;
                st.pose.root_index = def.root_index;
                for (const auto& row : s.at("pose3d")) {
                    if (row.size() != 4) throw ParseError(source, ln, "pose3d rows need [X,Y,Z,conf]");
                    st.pose.joints.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>(),
                                              row[3].get<double>()});
                }
                track.states.push_back(std::move(st));
            }
        } catch (const json::exception& e) {
            throw ParseError(source, ln, e.what());
        }
        try {
            for (std::size_t k = 0; k < track.states.size(); ++k) {
                validate(track.states[k].pose);
                if (track.states[k].frame != track.birth_frame + static_cast<std::int64_t>(k))
                    throw ValidationError("Track: states not contiguous from birth frame");
            }
        } catch (const ValidationError& e) {
            throw ValidationError(source + ":" + std::to_string(ln) + ": " + e.what());
        }
        file.tracks.push_back(std::move(track));
    }
    return file;
}

TrackFile load_tracks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(path.string() + ": cannot open tracks file");
    return read_tracks(in, path.string());
}

}  // namespace poselift
