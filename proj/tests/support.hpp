#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "poselift/ingest.hpp"
#include "poselift/pose3d.hpp"
#include "poselift/skeleton.hpp"
#include "poselift/tracking.hpp"

namespace testing {

using namespace poselift;

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("poselift_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline DepthMap constant_depth(int w, int h, float z) { return {w, h, std::vector<float>(std::size_t(w) * h, z)}; }

/// Mask covering the pixel rectangle [c0,c1) x [r0,r1).
inline Mask2D rect_mask(int w, int h, int c0, int r0, int c1, int r1) {
    std::vector<std::int64_t> idx;
    for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c) idx.push_back(std::int64_t(r) * w + c);
    return encode_mask(w, h, idx);
}

/// 15 keypoints, all at (u, v) with confidence 1.
inline Keypoints2D keypoints_at(double u, double v, double conf = 1.0) {
    Keypoints2D k;
    k.joints.assign(skeleton(kDefaultSkeleton).joint_count(), {u, v, conf});
    return k;
}

/// Detection whose box, mask and keypoints all describe the pixel
/// rectangle [c0,c1) x [r0,r1).
inline Detection rect_detection(std::int64_t frame, int w, int h, int c0, int r0, int c1, int r1,
                                double score = 0.9) {
    Detection d;
    d.frame_index = frame;
    d.box = {double(c0), double(r0), double(c1), double(r1)};
    d.mask = rect_mask(w, h, c0, r0, c1, r1);
    d.keypoints = keypoints_at(0.5 * (c0 + c1), 0.5 * (r0 + r1));
    d.score = score;
    return d;
}

/// Pose of the default skeleton with every joint at `p` plus per-joint offsets.
inline Pose3D pose_at(Point3 p, const std::vector<Point3>& offsets = {}) {
    const SkeletonDef def = skeleton(kDefaultSkeleton);
    Pose3D pose;
    pose.root_index = def.root_index;
    for (std::size_t j = 0; j < def.joint_count(); ++j) {
        Point3 o = j < offsets.size() ? offsets[j] : Point3{};
        pose.joints.push_back({p.x + o.x, p.y + o.y, p.z + o.z, 1.0});
    }
    return pose;
}

inline Box3D cube(double x, double y, double z, double side) {
    return {x, x + side, y, y + side, z, z + side};
}

/// Observation whose box is a `side` cube at (x, y, z) and whose pose is at its corner.
inline Observation cube_observation(std::size_t det, double x, double y, double z, double side = 1.0,
                                    double score = 0.9) {
    Observation o;
    o.det_index = det;
    o.score = score;
    o.box3d = cube(x, y, z, side);
    o.box2d = {x, y, x + side, y + side};
    o.pose = pose_at({x, y, z});
    return o;
}

}  // namespace testing
