#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "poselift/geometry.hpp"
#include "poselift/ingest.hpp"

namespace poselift {

struct Joint3D {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double confidence = 0.0;

    Point3 position() const { return {x, y, z}; }
    bool operator==(const Joint3D&) const = default;
};

struct Pose3D {
    std::vector<Joint3D> joints;
    std::size_t root_index = 0;
    std::string skeleton_id{kDefaultSkeleton};

    const Joint3D& root() const { return joints.at(root_index); }
    bool operator==(const Pose3D&) const = default;
};

void validate(const Pose3D& pose);

struct LifterSpec {
    std::string name = "depth_sampling";
    std::map<std::string, double> parameters;
};

/// Turns one 2D detection plus its frame's depth into a world-framed 3D pose.
class PoseLifter {
public:
    virtual ~PoseLifter() = default;
    virtual Pose3D lift(const Detection& det, const DepthMap& depth, const CameraModel& cam) const = 0;
    virtual std::string name() const = 0;
};

/// Per-joint depth sampling: the median valid depth in a patch around each
/// joint, taken over the person mask first, then over box pixels that fall
/// inside the person's own depth range, then the person's mid depth.
class DepthSamplingLifter final : public PoseLifter {
public:
    explicit DepthSamplingLifter(int patch = 5, LiftOptions opts = {});

    Pose3D lift(const Detection& det, const DepthMap& depth, const CameraModel& cam) const override;
    std::string name() const override { return "depth_sampling"; }

private:
    int patch_;
    LiftOptions opts_;
};

/// Free-function form of DepthSamplingLifter::lift.
Pose3D lift_pose(const Detection& det, const DepthMap& depth, const CameraModel& cam, int patch = 5,
                 const LiftOptions& opts = {});

/// Anchors each pose in the shared world frame. The depth-sampling lifter
/// already produces world-framed poses, so this is the identity for them.
std::vector<Pose3D> place_relative(std::vector<Pose3D> poses);

using LifterFactory = std::function<std::unique_ptr<PoseLifter>(const LifterSpec&, const LiftOptions&)>;

/// Throws UnknownName for unregistered names.
std::unique_ptr<PoseLifter> make_lifter(const LifterSpec& spec, const LiftOptions& opts = {});
void register_lifter(const std::string& name, LifterFactory factory);

}  // namespace poselift
