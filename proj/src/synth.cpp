#include "poselift/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "poselift/config.hpp"
#include "poselift/error.hpp"
#include "poselift/track_io.hpp"

namespace poselift::synth {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

// Joint offsets on the front face as fractions of (width, height), default
// skeleton order. The pelvis (root) is the origin.
constexpr std::array<std::array<double, 2>, 15> kJointOffsets{{
    {0.00, -0.42},   // head
    {0.00, -0.32},   // neck
    {-0.36, -0.28},  // r_shoulder
    {-0.40, -0.12},  // r_elbow
    {-0.40, 0.02},   // r_wrist
    {0.36, -0.28},   // l_shoulder
    {0.40, -0.12},   // l_elbow
    {0.40, 0.02},    // l_wrist
    {-0.18, 0.04},   // r_hip
    {-0.18, 0.24},   // r_knee
    {-0.18, 0.44},   // r_ankle
    {0.18, 0.04},    // l_hip
    {0.18, 0.24},    // l_knee
    {0.18, 0.44},    // l_ankle
    {0.00, 0.00},    // pelvis
}};

bool dropped(const Scenario& sc, std::size_t person, std::int64_t frame) {
    return std::any_of(sc.dropouts.begin(), sc.dropouts.end(), [&](const Dropout& d) {
        return d.person == person && frame >= d.first && frame <= d.last;
    });
}

// Entry depth of the ray (dx, dy, 1) into `b`, or +inf when it misses.
double ray_entry(double dx, double dy, const Box3D& b) {
    double lo = b.z_min, hi = b.z_max;
    auto slab = [&](double dir, double mn, double mx) {
        if (dir == 0.0) {
            if (mn > 0.0 || mx < 0.0) hi = -1.0;
            return;
        }
        double t0 = mn / dir, t1 = mx / dir;
        if (t0 > t1) std::swap(t0, t1);
        lo = std::max(lo, t0);
        hi = std::min(hi, t1);
    };
    slab(dx, b.x_min, b.x_max);
    slab(dy, b.y_min, b.y_max);
    return lo <= hi ? lo : std::numeric_limits<double>::infinity();
}

Box2D projected_extent(const CameraModel& cam, const Box3D& b) {
    Box2D out{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (double x : {b.x_min, b.x_max})
        for (double y : {b.y_min, b.y_max})
            for (double z : {b.z_min, b.z_max}) {
                const auto [u, v] = project(cam, {x, y, z});
                out.x_min = std::min(out.x_min, u);
                out.x_max = std::max(out.x_max, u);
                out.y_min = std::min(out.y_min, v);
                out.y_max = std::max(out.y_max, v);
            }
    return out;
}

std::mt19937_64 frame_rng(std::uint64_t seed, std::int64_t frame) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(frame), static_cast<std::uint32_t>(std::uint64_t(frame) >> 32)};
    return std::mt19937_64(seq);
}

PersonSpec person(Point3 extent, double score, std::vector<Waypoint> path) {
    return {std::move(path), extent, score};
}

}  // namespace

void validate(const Scenario& sc) {
    validate(sc.camera);
    if (sc.frames < 0) throw ScenarioError("Scenario.frames: negative");
    if (sc.width <= 0 || sc.height <= 0) throw ScenarioError("Scenario: image size must be positive");
    if (!(sc.fps > 0.0)) throw ScenarioError("Scenario.fps: must be positive");
    if (sc.noise.depth_sigma < 0.0 || sc.noise.keypoint_sigma < 0.0)
        throw ScenarioError("Scenario.noise: sigma must be >= 0");
    for (std::size_t i = 0; i < sc.persons.size(); ++i) {
        const auto& p = sc.persons[i];
        const std::string where = "Scenario.persons[" + std::to_string(i) + "]";
        if (p.path.empty()) throw ScenarioError(where + ": empty path");
        for (std::size_t k = 0; k < p.path.size(); ++k) {
            const auto& w = p.path[k];
            if (!std::isfinite(w.frame) || !std::isfinite(w.root.x) || !std::isfinite(w.root.y) ||
                !std::isfinite(w.root.z))
                throw ScenarioError(where + ": non-finite waypoint");
            if (k > 0 && !(w.frame > p.path[k - 1].frame))
                throw ScenarioError(where + ": waypoint frames must increase");
        }
        if (!(p.extent.x > 0.0 && p.extent.y > 0.0 && p.extent.z > 0.0))
            throw ScenarioError(where + ": extent must be positive");
        if (!(p.score >= 0.0 && p.score <= 1.0)) throw ScenarioError(where + ": score outside [0,1]");
    }
    for (const auto& d : sc.dropouts) {
        if (d.person >= sc.persons.size()) throw ScenarioError("Scenario.dropouts: unknown person");
        if (d.first < 0 || d.last >= sc.frames || d.first > d.last)
            throw ScenarioError("Scenario.dropouts: range outside [0, frames)");
    }
}

Point3 root_at(const PersonSpec& person, std::int64_t frame) {
    const double f = static_cast<double>(frame);
    const auto& path = person.path;
    if (f <= path.front().frame) return path.front().root;
    if (f >= path.back().frame) return path.back().root;
    std::size_t k = 1;
    while (path[k].frame < f) ++k;
    const Waypoint& a = path[k - 1];
    const Waypoint& b = path[k];
    const double s = (f - a.frame) / (b.frame - a.frame);
    return {a.root.x + (b.root.x - a.root.x) * s, a.root.y + (b.root.y - a.root.y) * s,
            a.root.z + (b.root.z - a.root.z) * s};
}

Box3D body_box(const PersonSpec& person, std::int64_t frame) {
    const Point3 r = root_at(person, frame);
    const Point3& e = person.extent;
    return {r.x - 0.5 * e.x, r.x + 0.5 * e.x, r.y - 0.5 * e.y, r.y + 0.5 * e.y, r.z, r.z + e.z};
}

Pose3D body_pose(const PersonSpec& person, std::int64_t frame) {
    const Point3 r = root_at(person, frame);
    const SkeletonDef def = skeleton(kDefaultSkeleton);
    Pose3D pose;
    pose.skeleton_id = def.id;
    pose.root_index = def.root_index;
    for (const auto& [ox, oy] : kJointOffsets)
        pose.joints.push_back({r.x + ox * person.extent.x, r.y + oy * person.extent.y, r.z, 1.0});
    return pose;
}

Rendered generate(const Scenario& sc) {
    validate(sc);
    const CameraModel& cam = sc.camera;
    const std::size_t n_px = static_cast<std::size_t>(sc.width) * sc.height;
    const std::size_t n_persons = sc.persons.size();

    Rendered out;
    out.sequence.camera = cam;
    out.sequence.fps = sc.fps;
    out.gt_tracks.resize(n_persons);
    for (std::size_t p = 0; p < n_persons; ++p) {
        out.gt_tracks[p].track_id = static_cast<std::int64_t>(p);
        out.gt_tracks[p].birth_frame = 0;
    }

    std::vector<double> zbuf(n_px);
    std::vector<int> owner(n_px);
    for (std::int64_t f = 0; f < sc.frames; ++f) {
        std::fill(zbuf.begin(), zbuf.end(), std::numeric_limits<double>::infinity());
        std::fill(owner.begin(), owner.end(), -1);
        std::vector<Box3D> boxes(n_persons);
        std::vector<Box2D> extents(n_persons);

        for (std::size_t p = 0; p < n_persons; ++p) {
            boxes[p] = body_box(sc.persons[p], f);
            if (!(boxes[p].z_min > 0.0))
                throw ScenarioError("person " + std::to_string(p) + " is behind the camera at frame " +
                                    std::to_string(f));
            extents[p] = projected_extent(cam, boxes[p]);
            const PixelRect rect = pixel_rect(extents[p], sc.width, sc.height);
            for (int r = rect.row_begin; r < rect.row_end; ++r) {
                const double dy = (r + 0.5 - cam.cy) / cam.fy;
                for (int c = rect.col_begin; c < rect.col_end; ++c) {
                    const double dx = (c + 0.5 - cam.cx) / cam.fx;
                    const double t = ray_entry(dx, dy, boxes[p]);
                    const std::size_t idx = static_cast<std::size_t>(r) * sc.width + c;
                    if (t < zbuf[idx]) {
                        zbuf[idx] = t;
                        owner[idx] = static_cast<int>(p);
                    }
                }
            }
        }

        auto rng = frame_rng(sc.seed, f);
        std::normal_distribution<double> gauss(0.0, 1.0);

        auto depth = std::make_shared<DepthMap>();
        depth->width = sc.width;
        depth->height = sc.height;
        depth->values.assign(n_px, 0.0f);
        for (std::size_t i = 0; i < n_px; ++i) {
            if (owner[i] < 0) continue;
            double d = zbuf[i] / cam.world_scale;
            if (sc.noise.depth_sigma > 0.0) d = std::max(1e-3, d + sc.noise.depth_sigma * gauss(rng));
            depth->values[i] = static_cast<float>(d);
        }

        FrameInput frame;
        frame.frame_index = f;
        frame.depth = depth;
        std::vector<std::size_t> owners;
        std::vector<std::vector<std::int64_t>> pixels(n_persons);
        for (std::size_t i = 0; i < n_px; ++i)
            if (owner[i] >= 0) pixels[static_cast<std::size_t>(owner[i])].push_back(static_cast<std::int64_t>(i));

        for (std::size_t p = 0; p < n_persons; ++p) {
            const Pose3D truth = body_pose(sc.persons[p], f);
            out.gt_tracks[p].states.push_back({f, StateKind::Observed, std::nullopt, extents[p], boxes[p], truth});

            if (dropped(sc, p, f) || pixels[p].empty()) continue;
            Detection det;
            det.frame_index = f;
            det.box = clamp(extents[p], sc.width, sc.height);
            det.mask = encode_mask(sc.width, sc.height, pixels[p]);
            det.score = sc.persons[p].score;
            for (const Joint3D& j : truth.joints) {
                auto [u, v] = project(cam, j.position());
                if (sc.noise.keypoint_sigma > 0.0) {
                    u += sc.noise.keypoint_sigma * gauss(rng);
                    v += sc.noise.keypoint_sigma * gauss(rng);
                }
                det.keypoints.joints.push_back({u, v, 1.0});
            }
            frame.detections.push_back(std::move(det));
            owners.push_back(p);
        }

        // Ingestion order: descending score, ties by person index.
        std::vector<std::size_t> order(owners.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return frame.detections[a].score > frame.detections[b].score;
        });
        FrameInput sorted{f, {}, depth};
        std::vector<std::size_t> sorted_owner;
        for (std::size_t i : order) {
            sorted.detections.push_back(std::move(frame.detections[i]));
            sorted_owner.push_back(owners[i]);
        }
        out.sequence.frames.push_back(std::move(sorted));
        out.detection_owner.push_back(std::move(sorted_owner));
    }
    out.ground_truth = ground_truth_from_tracks(out.gt_tracks);
    return out;
}

std::vector<std::string> builtin_names() {
    return {"parallel_walk", "depth_cross", "full_occlusion", "three_person_mix"};
}

Scenario full_occlusion(std::int64_t gap) {
    if (gap < 0) throw ScenarioError("full_occlusion: gap must be >= 0");
    Scenario sc;
    sc.name = "full_occlusion";
    sc.frames = 20 + gap + 15;
    // Constant velocity at a float-exact depth, off the optical axis.
    sc.persons.push_back(person({0.5, 1.7, 0.3}, 0.9,
                                {{0.0, {0.5, 1.65, 5.0}}, {double(sc.frames - 1), {2.0, 1.65, 5.0}}}));
    if (gap > 0) sc.dropouts.push_back({0, 20, 20 + gap - 1});
    return sc;
}

Scenario builtin(std::string_view name) {
    // The camera sits above head height, so every person shows a sliver of
    // its top face and the visible depth range stays stable over time.
    Scenario sc;
    sc.name = std::string(name);
    if (name == "parallel_walk") {
        sc.frames = 40;
        sc.persons.push_back(person({0.5, 1.7, 0.3}, 0.9, {{0.0, {-2.2, 1.65, 5.0}}, {39.0, {-0.8, 1.65, 5.0}}}));
        sc.persons.push_back(person({0.5, 1.8, 0.3}, 0.8, {{0.0, {0.9, 1.9, 6.0}}, {39.0, {2.4, 1.9, 6.0}}}));
    } else if (name == "depth_cross") {
        // A child at 3 m and, 3.5 m behind, an adult that is the child scaled
        // by 6.5/3 about the camera centre plus a little extra height, so the
        // adult stays visible as a thin strip above the child while their
        // boxes coincide. Image-space speed is 1 px/frame in opposite
        // directions; the pelvis columns cross between frames 50 and 51.
        constexpr double k = 6.5 / 3.0;
        constexpr double extra = 0.04875;
        sc.frames = 101;
        sc.persons.push_back(person({0.30, 0.90, 0.25}, 0.9,
                                    {{0.0, {29.5 * 3.0 / 400.0, 0.8, 3.0}}, {100.0, {129.5 * 3.0 / 400.0, 0.8, 3.0}}}));
        const double top = 0.35 * k - extra, bottom = 1.25 * k;
        sc.persons.push_back(person({0.30 * k, bottom - top, 0.25 * k}, 0.8,
                                    {{0.0, {130.5 * 6.5 / 400.0, 0.5 * (top + bottom), 6.5}},
                                     {100.0, {30.5 * 6.5 / 400.0, 0.5 * (top + bottom), 6.5}}}));
    } else if (name == "full_occlusion") {
        return full_occlusion(5);
    } else if (name == "three_person_mix") {
        sc.frames = 60;
        sc.persons.push_back(person({0.5, 1.7, 0.3}, 0.95, {{0.0, {-2.0, 1.55, 4.0}}, {59.0, {1.0, 1.55, 4.0}}}));
        sc.persons.push_back(person({0.5, 1.75, 0.3}, 0.85, {{0.0, {2.5, 2.075, 7.0}}, {59.0, {-1.5, 2.075, 7.0}}}));
        sc.persons.push_back(person({0.45, 1.6, 0.3}, 0.75,
                                    {{0.0, {0.8, 1.65, 5.5}}, {30.0, {0.8, 1.65, 5.0}}, {59.0, {1.8, 1.65, 5.0}}}));
        sc.dropouts.push_back({2, 40, 43});
    } else {
        throw UnknownName("unknown scenario '" + std::string(name) + "'");
    }
    return sc;
}

std::string scenario_to_json(const Scenario& sc) {
    ordered_json j;
    j["name"] = sc.name;
    j["frames"] = sc.frames;
    j["fps"] = sc.fps;
    j["width"] = sc.width;
    j["height"] = sc.height;
    j["camera"] = {{"fx", sc.camera.fx}, {"fy", sc.camera.fy}, {"cx", sc.camera.cx},
                   {"cy", sc.camera.cy}, {"world_scale", sc.camera.world_scale}};
    j["seed"] = sc.seed;
    j["noise"] = {{"depth_sigma", sc.noise.depth_sigma}, {"keypoint_sigma", sc.noise.keypoint_sigma}};
    ordered_json persons = ordered_json::array();
    for (const auto& p : sc.persons) {
        ordered_json path = ordered_json::array();
        for (const auto& w : p.path) path.push_back({w.frame, w.root.x, w.root.y, w.root.z});
        persons.push_back({{"extent", {p.extent.x, p.extent.y, p.extent.z}}, {"score", p.score}, {"path", path}});
    }
    j["persons"] = persons;
    ordered_json drops = ordered_json::array();
    for (const auto& d : sc.dropouts) drops.push_back({{"person", d.person}, {"first", d.first}, {"last", d.last}});
    j["dropouts"] = drops;
    return j.dump(2);
}

Scenario parse_scenario(std::string_view text, const std::string& source) {
    Scenario sc;
    try {
        const json j = json::parse(text);
        sc.name = j.value("name", std::string("custom"));
        sc.frames = j.at("frames").get<std::int64_t>();
        sc.fps = j.value("fps", sc.fps);
        sc.width = j.value("width", sc.width);
        sc.height = j.value("height", sc.height);
        if (auto c = j.find("camera"); c != j.end()) {
            sc.camera.fx = c->at("fx").get<double>();
            sc.camera.fy = c->at("fy").get<double>();
            sc.camera.cx = c->at("cx").get<double>();
            sc.camera.cy = c->at("cy").get<double>();
            sc.camera.world_scale = c->value("world_scale", 1.0);
        }
        sc.seed = j.value("seed", std::uint64_t{0});
        if (auto n = j.find("noise"); n != j.end()) {
            sc.noise.depth_sigma = n->value("depth_sigma", 0.0);
            sc.noise.keypoint_sigma = n->value("keypoint_sigma", 0.0);
        }
        for (const auto& p : j.at("persons")) {
            PersonSpec ps;
            const auto& e = p.at("extent");
            ps.extent = {e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()};
            ps.score = p.value("score", ps.score);
            for (const auto& w : p.at("path"))
                ps.path.push_back({w.at(0).get<double>(), {w.at(1).get<double>(), w.at(2).get<double>(), w.at(3).get<double>()}});
            sc.persons.push_back(std::move(ps));
        }
        if (auto d = j.find("dropouts"); d != j.end())
            for (const auto& x : *d)
                sc.dropouts.push_back({x.at("person").get<std::size_t>(), x.at("first").get<std::int64_t>(),
                                       x.at("last").get<std::int64_t>()});
    } catch (const json::exception& e) {
        throw ParseError(source, 0, e.what());
    }
    validate(sc);
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(path.string() + ": cannot open scenario file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path.string());
}

void write_dataset(const Scenario& sc, const Rendered& r, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "depth");
    auto open = [](const fs::path& p) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(p.string() + ": cannot write");
        return out;
    };

    {
        auto out = open(dir / "detections.jsonl");
        for (const auto& frame : r.sequence.frames)
            for (const auto& det : frame.detections) out << detection_to_json(det) << '\n';
    }
    for (const auto& frame : r.sequence.frames) save_depth(depth_path(dir / "depth", frame.frame_index), *frame.depth);
    {
        auto out = open(dir / "gt.jsonl");
        write_tracks_minimal(out, r.gt_tracks, std::string(kDefaultSkeleton));
    }
    {
        auto out = open(dir / "scenario.json");
        out << scenario_to_json(sc) << '\n';
    }
    {
        EngineConfig cfg;
        cfg.camera = sc.camera;
        cfg.fps = sc.fps;
        auto out = open(dir / "config.json");
        out << config_to_json(cfg) << '\n';
    }
}

}  // namespace poselift::synth
