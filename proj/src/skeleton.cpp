#include "poselift/skeleton.hpp"

#include <map>
#include <mutex>

#include "poselift/error.hpp"

namespace poselift {

struct SkeletonRegistry::Impl {
    mutable std::mutex mutex;
    std::map<std::string, SkeletonDef, std::less<>> defs;
};

SkeletonRegistry::SkeletonRegistry() : impl_(new Impl) {
    SkeletonDef def;
    def.id = std::string(kDefaultSkeleton);
    def.joint_names = {"head",       "neck",       "r_shoulder", "r_elbow", "r_wrist",
                       "l_shoulder", "l_elbow",    "l_wrist",    "r_hip",   "r_knee",
                       "r_ankle",    "l_hip",      "l_knee",     "l_ankle", "pelvis"};
    def.root_index = 14;
    impl_->defs.emplace(def.id, std::move(def));
}

SkeletonRegistry& SkeletonRegistry::instance() {
    // Never destroyed: lookups may happen during static teardown.
    static SkeletonRegistry* registry = new SkeletonRegistry;
    return *registry;
}

void SkeletonRegistry::add(SkeletonDef def) {
    if (def.id.empty()) throw ValidationError("SkeletonDef.id: empty");
    if (def.joint_names.empty()) throw ValidationError("SkeletonDef.joint_names: empty");
    if (def.root_index >= def.joint_names.size())
        throw ValidationError("SkeletonDef.root_index: out of range");
    std::lock_guard lock(impl_->mutex);
    impl_->defs.insert_or_assign(def.id, std::move(def));
}

SkeletonDef SkeletonRegistry::get(std::string_view id) const {
    std::lock_guard lock(impl_->mutex);
    auto it = impl_->defs.find(id);
    if (it == impl_->defs.end()) throw UnknownName("unknown skeleton '" + std::string(id) + "'");
    return it->second;
}

bool SkeletonRegistry::contains(std::string_view id) const {
    std::lock_guard lock(impl_->mutex);
    return impl_->defs.find(id) != impl_->defs.end();
}

SkeletonDef skeleton(std::string_view id) { return SkeletonRegistry::instance().get(id); }

}  // namespace poselift
