#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "poselift/pose3d.hpp"
#include "poselift/tracking.hpp"

namespace poselift {

/// A pose with an identity: a ground-truth person id or a track id.
struct PoseEntry {
    std::int64_t id = 0;
    Pose3D pose;
};

struct GtFrame {
    std::int64_t frame = 0;
    std::vector<PoseEntry> persons;
};

/// Frames sorted ascending; ids unique per frame.
struct GroundTruth {
    std::vector<GtFrame> frames;
};

void validate(const GroundTruth& gt);

/// Ground truth from track-shaped records (the file schema is shared).
GroundTruth ground_truth_from_tracks(std::span<const Track> tracks);

struct MotFrame {
    std::int64_t frame = 0;
    std::int64_t gt = 0;
    std::int64_t hypotheses = 0;
    std::int64_t matches = 0;
    std::int64_t misses = 0;
    std::int64_t false_positives = 0;
    std::int64_t id_switches = 0;
};

struct MotReport {
    double mota = 0.0;
    std::int64_t misses = 0;
    std::int64_t false_positives = 0;
    std::int64_t id_switches = 0;
    std::int64_t matches = 0;
    std::int64_t gt_total = 0;
    double radius = 0.0;
    std::vector<MotFrame> per_frame;
};

/// Optimal one-to-one GT/prediction matching on root-joint distance. Pairs
/// farther than `radius` are never matched; among the remaining, the number
/// of matches is maximised first, then the total distance minimised.
/// `gts` should be ordered by id.
std::vector<std::pair<std::int64_t, std::int64_t>> match_frame(std::span<const PoseEntry> gts,
                                                                std::span<const PoseEntry> preds,
                                                                double radius);

/// CLEAR-MOT accuracy over the frame range spanned by `gt`. Every track
/// state (observed or predicted) is a hypothesis in its frame.
/// Throws ValidationError when the ground truth holds no objects.
MotReport mota(const GroundTruth& gt, std::span<const Track> tracks, double radius = 0.5);

struct PosePair {
    Pose3D gt;
    Pose3D pred;
};

/// GT/prediction pose pairs produced by the same matching mota() uses.
std::vector<PosePair> matched_pose_pairs(const GroundTruth& gt, std::span<const Track> tracks,
                                         double radius = 0.5);

struct PckSequence {
    std::string name;
    std::vector<PosePair> pairs;
};

struct PckJoint {
    std::string name;
    double pck = 0.0;
    std::int64_t count = 0;
};

struct PckReport {
    double tau = 0.15;
    double pck_rel = 0.0;
    double auc_rel = 0.0;
    std::int64_t joints_evaluated = 0;
    std::vector<PckJoint> per_joint;
    std::vector<std::pair<std::string, double>> per_sequence;
};

/// Distances within this slack of a threshold count as inside it, so exact
/// boundary cases survive floating-point rounding.
inline constexpr double kPckBoundarySlack = 1e-9;

/// Thresholds 0.005 m .. 0.150 m in 0.005 m steps.
std::vector<double> auc_thresholds();

/// Root-aligned 3D PCK. A joint counts when its GT confidence is > 0 and its
/// error after moving the predicted root onto the GT root is <= tau.
/// Also fills auc_rel and the breakdowns. Throws ValidationError on a
/// skeleton mismatch or tau <= 0.
PckReport pck3d_rel(std::span<const PckSequence> sequences, double tau = 0.15);
PckReport pck3d_rel(std::span<const PosePair> pairs, double tau = 0.15);

/// Mean of pck3d_rel over auc_thresholds().
double auc_rel(std::span<const PosePair> pairs);

}  // namespace poselift
