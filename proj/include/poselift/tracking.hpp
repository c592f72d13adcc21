#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "poselift/assignment.hpp"
#include "poselift/geometry.hpp"
#include "poselift/pose3d.hpp"

namespace poselift {

enum class StateKind { Observed, Predicted };

/// One frame of a track. Observed states reference the detection index
/// within their frame; Predicted states come from the trajectory predictor.
struct TrackState {
    std::int64_t frame = 0;
    StateKind kind = StateKind::Observed;
    std::optional<std::size_t> detection;
    Box2D box2d;
    Box3D box3d;
    Pose3D pose;
};

struct Track {
    std::int64_t track_id = 0;
    std::int64_t birth_frame = 0;
    /// Contiguous from birth_frame; never ends in a Predicted state once finalized.
    std::vector<TrackState> states;
    /// Consecutive Predicted states at the tail.
    int gap_run = 0;
    bool terminated = false;

    const TrackState& last() const { return states.back(); }
    std::int64_t last_frame() const { return states.back().frame; }
};

enum class AssociationMode { Iou3d, Iou2d };

std::string to_string(AssociationMode mode);
/// Accepts "iou3d" / "iou2d"; throws ValidationError otherwise.
AssociationMode parse_association_mode(const std::string& s);

struct PredictorSpec {
    std::string name = "linear";
    std::map<std::string, double> parameters;
};

struct TrackerConfig {
    double iou_gate = 0.3;
    int max_gap = 10;
    int predictor_window = 5;
    AssociationMode association_mode = AssociationMode::Iou3d;
    double min_track_score = 0.0;
    PredictorSpec predictor;
};

void validate(const TrackerConfig& cfg);

/// A box to be associated: a live track's last box or a detection's box.
struct AssocBox {
    std::int64_t id = 0;
    Box3D box3d;
    Box2D box2d;
};

struct Association {
    std::vector<std::pair<std::int64_t, std::int64_t>> matches;  // (track_id, det_index)
    std::vector<std::int64_t> unmatched_tracks;
    std::vector<std::int64_t> unmatched_detections;
};

/// Maximum-total-IOU one-to-one matching restricted to pairs with IOU >= gate
/// (and IOU > 0). Tracks are expected in ascending id order; among equally
/// good matchings the one favouring lower track ids, then lower detection
/// indices, is returned.
Association associate(std::span<const AssocBox> tracks, std::span<const AssocBox> dets, double gate,
                      AssociationMode mode);

/// Same, over a precomputed similarity matrix (rows = tracks, cols = dets).
Association associate(const Matrix& iou, std::span<const std::int64_t> track_ids,
                      std::span<const std::int64_t> det_ids, double gate);

struct Prediction {
    Box2D box2d;
    Box3D box3d;
    Pose3D pose;
};

/// Extrapolates a track to a future frame.
class TrajectoryPredictor {
public:
    virtual ~TrajectoryPredictor() = default;
    virtual Prediction predict(const Track& track, std::int64_t frame) const = 0;
    virtual std::string name() const = 0;
};

/// Per-coordinate least-squares line over the most recent Observed states
/// (up to `window`); zero velocity with a single state.
class LinearPredictor final : public TrajectoryPredictor {
public:
    explicit LinearPredictor(int window = 5);
    Prediction predict(const Track& track, std::int64_t frame) const override;
    std::string name() const override { return "linear"; }

private:
    int window_;
};

/// LinearPredictor extrapolating to the frame after the track's last state.
Prediction predict(const Track& track, int window);

using PredictorFactory = std::function<std::unique_ptr<TrajectoryPredictor>(const PredictorSpec&, int window)>;
std::unique_ptr<TrajectoryPredictor> make_predictor(const PredictorSpec& spec, int window);
void register_predictor(const std::string& name, PredictorFactory factory);

/// A lifted detection ready for tracking.
struct Observation {
    std::size_t det_index = 0;
    double score = 1.0;
    Box2D box2d;
    Box3D box3d;
    Pose3D pose;
};

struct LiftedFrame {
    std::int64_t frame_index = 0;
    std::vector<Observation> observations;
};

/// Online tracker state. Feed frames in increasing order; skipped frame
/// indices are processed as frames without detections.
class Tracker {
public:
    explicit Tracker(TrackerConfig cfg);

    void step(std::int64_t frame_index, std::span<const Observation> observations);

    /// Drops trailing Predicted runs and returns every track in id order.
    std::vector<Track> finalize();

    const std::vector<Track>& tracks() const { return tracks_; }
    const TrackerConfig& config() const { return cfg_; }

private:
    void advance(std::int64_t frame_index, std::span<const Observation> observations);

    TrackerConfig cfg_;
    std::unique_ptr<TrajectoryPredictor> predictor_;
    std::vector<Track> tracks_;
    std::vector<std::size_t> live_;  // indices into tracks_, ascending id
    std::int64_t next_id_ = 0;
    std::optional<std::int64_t> last_frame_;
};

struct LiftingConfig {
    LiftOptions options;
    LifterSpec lifter;
};

/// Lifts every detection of every frame. Errors carry the frame index.
std::vector<LiftedFrame> lift_sequence(const SequenceInput& seq, const LiftingConfig& lifting = {});

std::vector<Track> track_lifted(std::span<const LiftedFrame> frames, const TrackerConfig& cfg);

/// lift_sequence followed by track_lifted.
std::vector<Track> run_sequence(const SequenceInput& seq, const TrackerConfig& cfg,
                                const LiftingConfig& lifting = {});

}  // namespace poselift
