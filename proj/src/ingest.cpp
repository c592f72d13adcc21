#include "poselift/ingest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <thread>

#include <json.hpp>

#include "poselift/error.hpp"

namespace poselift {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

bool finite(double v) { return std::isfinite(v); }

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

// True when any pixel of the mask has its centre inside `rect`.
bool mask_touches(const Mask2D& mask, const PixelRect& rect) {
    if (rect.empty()) return false;
    for (const auto& run : mask.runs) {
        std::int64_t idx = run.start;
        const std::int64_t end = run.start + run.length;
        while (idx < end) {
            const int row = static_cast<int>(idx / mask.width);
            const int col = static_cast<int>(idx % mask.width);
            const std::int64_t row_end = std::min<std::int64_t>(end, std::int64_t{row + 1} * mask.width);
            const int last_col = static_cast<int>((row_end - 1) % mask.width);
            if (row >= rect.row_begin && row < rect.row_end && col < rect.col_end &&
                last_col >= rect.col_begin)
                return true;
            idx = row_end;
        }
    }
    return false;
}

}  // namespace

void validate(const DepthMap& depth) {
    if (depth.width <= 0 || depth.height <= 0)
        throw ValidationError("DepthMap: width and height must be positive");
    if (depth.values.size() != static_cast<std::size_t>(depth.width) * depth.height)
        throw ValidationError("DepthMap: payload has " + std::to_string(depth.values.size()) +
                              " values, expected " +
                              std::to_string(std::size_t(depth.width) * depth.height));
    for (std::size_t i = 0; i < depth.values.size(); ++i) {
        const float v = depth.values[i];
        if (!std::isfinite(v))
            throw ValidationError("DepthMap: non-finite value at pixel " + std::to_string(i));
        if (v < 0.0f)
            throw ValidationError("DepthMap: negative value at pixel " + std::to_string(i));
    }
}

void validate(const Box2D& box) {
    if (!finite(box.x_min) || !finite(box.y_min) || !finite(box.x_max) || !finite(box.y_max))
        throw ValidationError("Box2D: non-finite coordinate");
    if (!(box.x_min < box.x_max)) throw ValidationError("Box2D: x_min must be < x_max");
    if (!(box.y_min < box.y_max)) throw ValidationError("Box2D: y_min must be < y_max");
}

Box2D clamp(const Box2D& box, int width, int height) {
    return {std::clamp(box.x_min, 0.0, double(width)), std::clamp(box.y_min, 0.0, double(height)),
            std::clamp(box.x_max, 0.0, double(width)), std::clamp(box.y_max, 0.0, double(height))};
}

PixelRect pixel_rect(const Box2D& box, int width, int height) {
    // Pixel (c,r) covers [c,c+1)x[r,r+1); it belongs to the box when its centre does.
    auto lo = [](double v, int limit) {
        return static_cast<int>(std::clamp(std::ceil(v - 0.5), 0.0, double(limit)));
    };
    auto hi = [](double v, int limit) {
        return static_cast<int>(std::clamp(std::floor(v - 0.5) + 1.0, 0.0, double(limit)));
    };
    return {lo(box.x_min, width), hi(box.x_max, width), lo(box.y_min, height),
            hi(box.y_max, height)};
}

void validate(const Keypoints2D& keypoints) {
    const auto def = skeleton(keypoints.skeleton_id);
    if (keypoints.joints.size() != def.joint_count())
        throw ValidationError("Keypoints2D: skeleton '" + def.id + "' needs " +
                              std::to_string(def.joint_count()) + " joints, got " +
                              std::to_string(keypoints.joints.size()));
    for (std::size_t i = 0; i < keypoints.joints.size(); ++i) {
        const auto& j = keypoints.joints[i];
        const std::string where = "Keypoints2D.joints[" + std::to_string(i) + "]";
        if (!finite(j.u) || !finite(j.v)) throw ValidationError(where + ": non-finite position");
        if (!in_unit(j.confidence)) throw ValidationError(where + ": confidence outside [0,1]");
    }
}

void validate(const Detection& det) {
    if (det.frame_index < 0) throw ValidationError("Detection.frame_index: negative");
    if (!in_unit(det.score)) throw ValidationError("Detection.score: outside [0,1]");
    validate(det.box);
    validate(det.mask);
    validate(det.keypoints);
    if (pixel_count(det.mask) < 1) throw ValidationError("Mask2D: empty person mask");
    if (!mask_touches(det.mask, pixel_rect(det.box, det.mask.width, det.mask.height)))
        throw ValidationError("Detection: Box2D does not overlap the mask support");
}

void validate(const CameraModel& cam) {
    if (!(cam.fx > 0.0) || !(cam.fy > 0.0))
        throw ValidationError("CameraModel: fx and fy must be positive");
    if (!finite(cam.cx) || !finite(cam.cy)) throw ValidationError("CameraModel: non-finite centre");
    if (!(cam.world_scale > 0.0) || !finite(cam.world_scale))
        throw ValidationError("CameraModel.world_scale: must be positive");
}

Detection parse_detection_line(const std::string& line, const std::string& source,
                               std::size_t line_no, std::string_view skeleton_id) {
    Detection det;
    try {
        const json j = json::parse(line);
        det.frame_index = j.at("frame").get<std::int64_t>();
        const auto& box = j.at("box");
        if (!box.is_array() || box.size() != 4) throw ParseError(source, line_no, "box needs 4 numbers");
        det.box = {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
                   box[3].get<double>()};
        const auto& mask = j.at("mask");
        det.mask.width = mask.at("w").get<int>();
        det.mask.height = mask.at("h").get<int>();
        for (const auto& run : mask.at("runs")) {
            if (!run.is_array() || run.size() != 2)
                throw ParseError(source, line_no, "mask run needs [start,len]");
            det.mask.runs.push_back({run[0].get<std::int64_t>(), run[1].get<std::int64_t>()});
        }
        det.keypoints.skeleton_id = std::string(skeleton_id);
        for (const auto& kp : j.at("keypoints")) {
            if (!kp.is_array() || kp.size() != 3)
                throw ParseError(source, line_no, "keypoint needs [u,v,conf]");
            det.keypoints.joints.push_back({kp[0].get<double>(), kp[1].get<double>(),
                                            kp[2].get<double>()});
        }
        det.score = j.at("score").get<double>();
    } catch (const json::exception& e) {
        throw ParseError(source, line_no, e.what());
    }
    try {
        validate(det);
    } catch (const ValidationError& e) {
        throw ValidationError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
    return det;
}

std::vector<FrameDetections> parse_detections(std::istream& in, const std::string& source,
                                              std::string_view skeleton_id) {
    std::map<std::int64_t, std::vector<Detection>> by_frame;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto det = parse_detection_line(line, source, line_no, skeleton_id);
        by_frame[det.frame_index].push_back(std::move(det));
    }
    std::vector<FrameDetections> frames;
    frames.reserve(by_frame.size());
    for (auto& [frame, dets] : by_frame) {
        std::stable_sort(dets.begin(), dets.end(),
                         [](const Detection& a, const Detection& b) { return a.score > b.score; });
        frames.push_back({frame, std::move(dets)});
    }
    return frames;
}

std::vector<FrameDetections> parse_detections(const std::filesystem::path& path,
                                              std::string_view skeleton_id) {
    std::ifstream in(path);
    if (!in) throw Error(path.string() + ": cannot open detections file");
    return parse_detections(in, path.string(), skeleton_id);
}

std::string detection_to_json(const Detection& det) {
    ordered_json j;
    j["frame"] = det.frame_index;
    j["box"] = {det.box.x_min, det.box.y_min, det.box.x_max, det.box.y_max};
    ordered_json runs = ordered_json::array();
    for (const auto& r : det.mask.runs) runs.push_back({r.start, r.length});
    j["mask"] = {{"w", det.mask.width}, {"h", det.mask.height}, {"runs", std::move(runs)}};
    ordered_json kps = ordered_json::array();
    for (const auto& k : det.keypoints.joints) kps.push_back({k.u, k.v, k.confidence});
    j["keypoints"] = std::move(kps);
    j["score"] = det.score;
    return j.dump();
}

void write_detections(std::ostream& out, std::span<const FrameDetections> frames) {
    for (const auto& frame : frames)
        for (const auto& det : frame.detections) out << detection_to_json(det) << '\n';
}

std::filesystem::path depth_path(const std::filesystem::path& dir, std::int64_t frame_index) {
    return dir / (std::to_string(frame_index) + ".dpt");
}

SequenceInput load_sequence(std::span<const FrameDetections> frames,
                            const std::filesystem::path& depth_dir, const CameraModel& camera,
                            double fps) {
    validate(camera);
    if (!(fps > 0.0)) throw ValidationError("SequenceInput.fps: must be positive");
    for (std::size_t i = 1; i < frames.size(); ++i)
        if (frames[i].frame_index <= frames[i - 1].frame_index)
            throw ValidationError("SequenceInput: frame_index not strictly increasing at frame " +
                                  std::to_string(frames[i].frame_index));

    SequenceInput seq;
    seq.camera = camera;
    seq.fps = fps;
    seq.frames.resize(frames.size());
    std::vector<std::exception_ptr> errors(frames.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < frames.size(); i = next++) {
            const auto& src = frames[i];
            auto& dst = seq.frames[i];
            dst.frame_index = src.frame_index;
            dst.detections = src.detections;
            try {
                auto depth = std::make_shared<DepthMap>(load_depth(depth_path(depth_dir, src.frame_index)));
                for (const auto& det : dst.detections)
                    if (det.mask.width != depth->width || det.mask.height != depth->height)
                        throw ValidationError("Mask2D: dimensions differ from the depth map");
                dst.depth = std::move(depth);
            } catch (const std::exception& e) {
                errors[i] = std::make_exception_ptr(
                    Error("frame " + std::to_string(src.frame_index) + ": " + e.what()));
            }
        }
    };
    const std::size_t n_threads =
        std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, frames.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return seq;
}

}  // namespace poselift
