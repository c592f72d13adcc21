#include "poselift/pose3d.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>

#include "poselift/error.hpp"

namespace poselift {

namespace {

double median(std::vector<float>& v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

struct Registry {
    std::mutex mutex;
    std::map<std::string, LifterFactory> factories;

    Registry() {
        factories["depth_sampling"] = [](const LifterSpec& spec, const LiftOptions& opts) {
            int patch = 5;
            if (auto it = spec.parameters.find("patch"); it != spec.parameters.end())
                patch = static_cast<int>(it->second);
            return std::make_unique<DepthSamplingLifter>(patch, opts);
        };
    }
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

void validate(const Pose3D& pose) {
    const auto def = skeleton(pose.skeleton_id);
    if (pose.joints.size() != def.joint_count())
        throw ValidationError("Pose3D: skeleton '" + def.id + "' needs " +
                              std::to_string(def.joint_count()) + " joints, got " +
                              std::to_string(pose.joints.size()));
    if (pose.root_index != def.root_index) throw ValidationError("Pose3D.root_index: mismatch with skeleton");
    for (const auto& j : pose.joints) {
        if (!std::isfinite(j.x) || !std::isfinite(j.y) || !std::isfinite(j.z))
            throw ValidationError("Pose3D: non-finite joint coordinate");
        if (!(j.confidence >= 0.0 && j.confidence <= 1.0))
            throw ValidationError("Pose3D: joint confidence outside [0,1]");
    }
}

DepthSamplingLifter::DepthSamplingLifter(int patch, LiftOptions opts) : patch_(patch), opts_(opts) {
    if (patch_ < 1 || patch_ % 2 == 0) throw ValidationError("lift_pose: patch must be odd and >= 1");
}

Pose3D DepthSamplingLifter::lift(const Detection& det, const DepthMap& depth,
                                 const CameraModel& cam) const {
    validate(det);
    validate(cam);
    if (det.mask.width != depth.width || det.mask.height != depth.height)
        throw ValidationError("Mask2D: dimensions differ from the depth map");
    const auto def = skeleton(det.keypoints.skeleton_id);

    std::optional<DepthRange> person;
    try {
        person = depth_extrema(depth, det.mask, det.box, opts_.depth_percentile);
    } catch (const EmptySupport&) {
    }

    const auto covered = rasterize(det.mask);
    const PixelRect box_px = pixel_rect(det.box, depth.width, depth.height);
    const int radius = patch_ / 2;
    std::vector<float> samples;
    samples.reserve(static_cast<std::size_t>(patch_) * patch_);

    auto sample_depth = [&](const Keypoint2D& kp) -> std::optional<double> {
        const int col0 = static_cast<int>(std::floor(kp.u));
        const int row0 = static_cast<int>(std::floor(kp.v));
        const int c_lo = std::max(0, col0 - radius), c_hi = std::min(depth.width - 1, col0 + radius);
        const int r_lo = std::max(0, row0 - radius), r_hi = std::min(depth.height - 1, row0 + radius);

        samples.clear();
        for (int r = r_lo; r <= r_hi; ++r)
            for (int c = c_lo; c <= c_hi; ++c) {
                const std::size_t idx = static_cast<std::size_t>(r) * depth.width + c;
                if (covered[idx] && DepthMap::valid(depth.values[idx])) samples.push_back(depth.values[idx]);
            }
        if (!samples.empty()) return median(samples);

        // Box pixels, excluding depths outside the person's own range (occluders).
        for (int r = r_lo; r <= r_hi; ++r)
            for (int c = c_lo; c <= c_hi; ++c) {
                if (!box_px.contains(c, r)) continue;
                const float d = depth.values[static_cast<std::size_t>(r) * depth.width + c];
                if (!DepthMap::valid(d)) continue;
                if (person && (d < person->z_min || d > person->z_max)) continue;
                samples.push_back(d);
            }
        if (!samples.empty()) return median(samples);

        if (person) return 0.5 * (person->z_min + person->z_max);
        return std::nullopt;
    };

    const auto& kps = det.keypoints.joints;
    const auto& root_kp = kps.at(def.root_index);
    if (!(root_kp.confidence > 0.0))
        throw ValidationError("Pose3D: root joint '" + def.joint_names[def.root_index] +
                              "' has zero confidence");
    const auto root_depth = sample_depth(root_kp);
    if (!root_depth) throw EmptySupport("root joint has no valid depth in its support");
    const Point3 root = back_project(cam, root_kp.u, root_kp.v, *root_depth);

    Pose3D pose;
    pose.skeleton_id = def.id;
    pose.root_index = def.root_index;
    pose.joints.resize(kps.size());
    for (std::size_t i = 0; i < kps.size(); ++i) {
        auto& out = pose.joints[i];
        std::optional<double> z;
        if (i == def.root_index)
            z = root_depth;
        else if (kps[i].confidence > 0.0)
            z = sample_depth(kps[i]);
        if (z) {
            const Point3 p = back_project(cam, kps[i].u, kps[i].v, *z);
            out = {p.x, p.y, p.z, kps[i].confidence};
        } else {
            out = {root.x, root.y, root.z, 0.0};
        }
    }
    return pose;
}

Pose3D lift_pose(const Detection& det, const DepthMap& depth, const CameraModel& cam, int patch,
                 const LiftOptions& opts) {
    return DepthSamplingLifter(patch, opts).lift(det, depth, cam);
}

std::vector<Pose3D> place_relative(std::vector<Pose3D> poses) { return poses; }

std::unique_ptr<PoseLifter> make_lifter(const LifterSpec& spec, const LiftOptions& opts) {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    auto it = reg.factories.find(spec.name);
    if (it == reg.factories.end()) throw UnknownName("unknown lifter '" + spec.name + "'");
    return it->second(spec, opts);
}

void register_lifter(const std::string& name, LifterFactory factory) {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    reg.factories[name] = std::move(factory);
}

}  // namespace poselift
