#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace poselift {

/// Joint ordering convention shared by 2D keypoints and 3D poses.
struct SkeletonDef {
    std::string id;
    std::vector<std::string> joint_names;
    std::size_t root_index = 0;

    std::size_t joint_count() const { return joint_names.size(); }
};

/// Name of the built-in 15-joint skeleton (pelvis root, last joint).
inline constexpr std::string_view kDefaultSkeleton = "default15";

/// Process-wide registry of skeleton conventions. Thread-safe.
/// The default skeleton is always present.
class SkeletonRegistry {
public:
    static SkeletonRegistry& instance();

    /// Adds or replaces a definition. Throws ValidationError if the root
    /// index is out of range or the joint list is empty.
    void add(SkeletonDef def);

    /// Throws UnknownName.
    SkeletonDef get(std::string_view id) const;
    bool contains(std::string_view id) const;

private:
    SkeletonRegistry();
    struct Impl;
    Impl* impl_;
};

/// Shorthand for `SkeletonRegistry::instance().get(id)`.
SkeletonDef skeleton(std::string_view id);

}  // namespace poselift
