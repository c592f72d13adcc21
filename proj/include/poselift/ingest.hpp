#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "poselift/skeleton.hpp"

namespace poselift {

/// Per-pixel metric depth for one frame, row-major. 0.0 marks an invalid pixel.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<float> values;

    std::size_t size() const { return values.size(); }
    float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    static bool valid(float depth) { return depth > 0.0f; }

    bool operator==(const DepthMap&) const = default;
};

/// Throws ValidationError when dimensions, payload size or values are bad.
void validate(const DepthMap& depth);

struct Box2D {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }

    bool operator==(const Box2D&) const = default;
};

void validate(const Box2D& box);

/// Clamps a box to [0,width]x[0,height].
Box2D clamp(const Box2D& box, int width, int height);

/// Half-open pixel range [col_begin,col_end) x [row_begin,row_end) of the
/// pixels whose centres fall inside `box`, clipped to the image.
struct PixelRect {
    int col_begin = 0;
    int col_end = 0;
    int row_begin = 0;
    int row_end = 0;

    bool empty() const { return col_begin >= col_end || row_begin >= row_end; }
    bool contains(int col, int row) const {
        return col >= col_begin && col < col_end && row >= row_begin && row < row_end;
    }
};

PixelRect pixel_rect(const Box2D& box, int width, int height);

struct MaskRun {
    std::int64_t start = 0;
    std::int64_t length = 0;

    bool operator==(const MaskRun&) const = default;
};

/// Run-length mask over a full frame in row-major pixel order.
struct Mask2D {
    int width = 0;
    int height = 0;
    std::vector<MaskRun> runs;

    bool operator==(const Mask2D&) const = default;
};

/// Runs must be sorted, non-empty, non-overlapping and inside the frame.
void validate(const Mask2D& mask);

/// Covered row-major pixel indices in ascending order.
std::vector<std::int64_t> decode_mask(const Mask2D& mask);

/// Canonical run encoding (adjacent runs merged) of ascending indices.
Mask2D encode_mask(int width, int height, std::span<const std::int64_t> indices);

/// Dense per-pixel coverage, size width*height.
std::vector<std::uint8_t> rasterize(const Mask2D& mask);

std::int64_t pixel_count(const Mask2D& mask);

struct Keypoint2D {
    double u = 0.0;
    double v = 0.0;
    double confidence = 0.0;

    bool operator==(const Keypoint2D&) const = default;
};

struct Keypoints2D {
    std::vector<Keypoint2D> joints;
    std::string skeleton_id{kDefaultSkeleton};

    bool operator==(const Keypoints2D&) const = default;
};

void validate(const Keypoints2D& keypoints);

struct Detection {
    std::int64_t frame_index = 0;
    Box2D box;
    Mask2D mask;
    Keypoints2D keypoints;
    double score = 0.0;

    bool operator==(const Detection&) const = default;
};

/// Checks every field invariant plus mask/box consistency.
/// The frame-dimension check needs the depth map and happens at sequence load.
void validate(const Detection& det);

struct CameraModel {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    double world_scale = 1.0;

    bool operator==(const CameraModel&) const = default;
};

void validate(const CameraModel& cam);

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool operator==(const Point3&) const = default;
};

/// Pinhole back-projection of pixel (u,v) at raw depth `depth`.
inline Point3 back_project(const CameraModel& cam, double u, double v, double depth) {
    const double z = depth * cam.world_scale;
    return {(u - cam.cx) * z / cam.fx, (v - cam.cy) * z / cam.fy, z};
}

/// Inverse of back_project; world_scale cancels.
inline std::pair<double, double> project(const CameraModel& cam, const Point3& p) {
    return {cam.fx * p.x / p.z + cam.cx, cam.fy * p.y / p.z + cam.cy};
}

struct FrameDetections {
    std::int64_t frame_index = 0;
    std::vector<Detection> detections;
};

struct FrameInput {
    std::int64_t frame_index = 0;
    std::vector<Detection> detections;
    std::shared_ptr<const DepthMap> depth;
};

struct SequenceInput {
    std::vector<FrameInput> frames;
    CameraModel camera;
    double fps = 25.0;
};

/// Parses one detection JSON line. `line_no` is used in diagnostics.
Detection parse_detection_line(const std::string& line, const std::string& source,
                               std::size_t line_no, std::string_view skeleton_id);

/// Reads a JSON-lines detections stream grouped by frame. Within a frame,
/// detections are ordered by descending score, then input order.
std::vector<FrameDetections> parse_detections(std::istream& in, const std::string& source,
                                              std::string_view skeleton_id = kDefaultSkeleton);
std::vector<FrameDetections> parse_detections(const std::filesystem::path& path,
                                              std::string_view skeleton_id = kDefaultSkeleton);

std::string detection_to_json(const Detection& det);
void write_detections(std::ostream& out, std::span<const FrameDetections> frames);

DepthMap read_depth(std::istream& in, const std::string& source);
DepthMap load_depth(const std::filesystem::path& path);
void write_depth(std::ostream& out, const DepthMap& depth);
void save_depth(const std::filesystem::path& path, const DepthMap& depth);

/// `<dir>/<frame>.dpt`
std::filesystem::path depth_path(const std::filesystem::path& dir, std::int64_t frame_index);

/// Loads the depth raster of every detection frame from `depth_dir` (in
/// parallel) and checks that masks match the raster dimensions.
/// Errors name the frame they occurred in.
SequenceInput load_sequence(std::span<const FrameDetections> frames,
                            const std::filesystem::path& depth_dir, const CameraModel& camera,
                            double fps);

}  // namespace poselift
