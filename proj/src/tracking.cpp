#include "poselift/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "poselift/error.hpp"

namespace poselift {

std::string to_string(AssociationMode mode) {
    return mode == AssociationMode::Iou3d ? "iou3d" : "iou2d";
}

AssociationMode parse_association_mode(const std::string& s) {
    if (s == "iou3d") return AssociationMode::Iou3d;
    if (s == "iou2d") return AssociationMode::Iou2d;
    throw ValidationError("TrackerConfig.association_mode: expected iou3d or iou2d, got '" + s + "'");
}

void validate(const TrackerConfig& cfg) {
    if (!(cfg.iou_gate >= 0.0 && cfg.iou_gate <= 1.0))
        throw ValidationError("TrackerConfig.iou_gate: outside [0,1]");
    if (cfg.max_gap < 0) throw ValidationError("TrackerConfig.max_gap: negative");
    if (cfg.predictor_window < 1) throw ValidationError("TrackerConfig.predictor_window: must be >= 1");
    if (!(cfg.min_track_score >= 0.0 && cfg.min_track_score <= 1.0))
        throw ValidationError("TrackerConfig.min_track_score: outside [0,1]");
}

namespace {

// Equal totals computed in different summation orders differ by a few ulps.
constexpr double kTieTolerance = 1e-9;

// Best total weight over one-to-one matchings of `rows` x `cols`.
double best_total(const Matrix& w, std::span<const std::size_t> rows, std::span<const std::size_t> cols) {
    if (rows.empty() || cols.empty()) return 0.0;
    Matrix cost(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) cost(r, c) = -w(rows[r], cols[c]);
    const std::vector<int> pick = solve_assignment(cost);
    double total = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r)
        if (pick[r] >= 0) total += w(rows[r], cols[static_cast<std::size_t>(pick[r])]);
    return total;
}

// Lexicographically smallest optimal matching of one connected component:
// rows in order take the lowest column that still admits the optimum.
void match_component(const Matrix& w, std::vector<std::size_t> rows, std::vector<std::size_t> cols,
                     std::vector<int>& row_to_col) {
    double target = best_total(w, rows, cols);
    while (!rows.empty()) {
        const std::size_t r = rows.front();
        const std::vector<std::size_t> rest(rows.begin() + 1, rows.end());
        bool taken = false;
        for (std::size_t k = 0; k < cols.size() && !taken; ++k) {
            const std::size_t c = cols[k];
            if (!(w(r, c) > 0.0)) continue;
            std::vector<std::size_t> left = cols;
            left.erase(left.begin() + static_cast<std::ptrdiff_t>(k));
            const double remaining = best_total(w, rest, left);
            if (w(r, c) + remaining >= target - kTieTolerance) {
                row_to_col[r] = static_cast<int>(c);
                cols = std::move(left);
                target = remaining;
                taken = true;
            }
        }
        rows.erase(rows.begin());
    }
}

}  // namespace

Association associate(const Matrix& iou, std::span<const std::int64_t> track_ids,
                      std::span<const std::int64_t> det_ids, double gate) {
    const std::size_t n = track_ids.size(), m = det_ids.size();
    // Gated-out pairs get weight 0 and never match.
    Matrix w(n, m);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < m; ++c) {
            const double v = iou(r, c);
            w(r, c) = (v >= gate && v > 0.0) ? v : 0.0;
        }

    // Connected components of the gated bipartite graph; nodes 0..n-1 are
    // rows, n..n+m-1 columns.
    std::vector<std::size_t> parent(n + m);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < m; ++c)
            if (w(r, c) > 0.0) parent[find(r)] = find(n + c);

    std::vector<int> row_to_col(n, -1);
    std::vector<std::vector<std::size_t>> comp_rows(n + m), comp_cols(n + m);
    for (std::size_t r = 0; r < n; ++r) comp_rows[find(r)].push_back(r);
    for (std::size_t c = 0; c < m; ++c) comp_cols[find(n + c)].push_back(c);
    for (std::size_t k = 0; k < n + m; ++k) {
        const auto& rows = comp_rows[k];
        const auto& cols = comp_cols[k];
        if (rows.empty() || cols.empty()) continue;
        if (rows.size() == 1) {
            std::size_t best = cols.front();
            for (std::size_t c : cols)
                if (w(rows[0], c) > w(rows[0], best)) best = c;
            row_to_col[rows[0]] = static_cast<int>(best);
        } else if (cols.size() == 1) {
            std::size_t best = rows.front();
            for (std::size_t r : rows)
                if (w(r, cols[0]) > w(best, cols[0])) best = r;
            row_to_col[best] = static_cast<int>(cols[0]);
        } else {
            match_component(w, rows, cols, row_to_col);
        }
    }

    Association out;
    std::vector<char> det_used(m, 0);
    for (std::size_t r = 0; r < n; ++r) {
        const int c = row_to_col[r];
        if (c >= 0) {
            out.matches.emplace_back(track_ids[r], det_ids[static_cast<std::size_t>(c)]);
            det_used[static_cast<std::size_t>(c)] = 1;
        } else {
            out.unmatched_tracks.push_back(track_ids[r]);
        }
    }
    for (std::size_t c = 0; c < m; ++c)
        if (!det_used[c]) out.unmatched_detections.push_back(det_ids[c]);
    return out;
}

Association associate(std::span<const AssocBox> tracks, std::span<const AssocBox> dets, double gate,
                      AssociationMode mode) {
    Matrix iou(tracks.size(), dets.size());
    for (std::size_t r = 0; r < tracks.size(); ++r)
        for (std::size_t c = 0; c < dets.size(); ++c)
            iou(r, c) = mode == AssociationMode::Iou3d ? iou3d(tracks[r].box3d, dets[c].box3d)
                                                       : iou2d(tracks[r].box2d, dets[c].box2d);
    std::vector<std::int64_t> track_ids(tracks.size()), det_ids(dets.size());
    std::transform(tracks.begin(), tracks.end(), track_ids.begin(), [](const AssocBox& b) { return b.id; });
    std::transform(dets.begin(), dets.end(), det_ids.begin(), [](const AssocBox& b) { return b.id; });
    return associate(iou, track_ids, det_ids, gate);
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    predictor_ = make_predictor(cfg_.predictor, cfg_.predictor_window);
}

void Tracker::step(std::int64_t frame_index, std::span<const Observation> observations) {
    if (frame_index < 0) throw SequencingError("frame index " + std::to_string(frame_index) + " is negative");
    if (last_frame_ && frame_index <= *last_frame_)
        throw SequencingError("frame " + std::to_string(frame_index) + " does not follow frame " +
                              std::to_string(*last_frame_));
    if (last_frame_)
        for (std::int64_t f = *last_frame_ + 1; f < frame_index; ++f) advance(f, {});
    advance(frame_index, observations);
}

void Tracker::advance(std::int64_t frame_index, std::span<const Observation> observations) {
    last_frame_ = frame_index;

    const std::size_t n = live_.size(), m = observations.size();
    Matrix iou(n, m);
    for (std::size_t r = 0; r < n; ++r) {
        const TrackState& last = tracks_[live_[r]].last();
        for (std::size_t c = 0; c < m; ++c)
            iou(r, c) = cfg_.association_mode == AssociationMode::Iou3d
                            ? iou3d(last.box3d, observations[c].box3d)
                            : iou2d(last.box2d, observations[c].box2d);
    }
    std::vector<std::int64_t> rows(n), cols(m);
    std::iota(rows.begin(), rows.end(), 0);
    std::iota(cols.begin(), cols.end(), 0);
    const Association assoc = associate(iou, rows, cols, cfg_.iou_gate);

    for (const auto& [r, c] : assoc.matches) {
        Track& track = tracks_[live_[static_cast<std::size_t>(r)]];
        const Observation& obs = observations[static_cast<std::size_t>(c)];
        track.states.push_back({frame_index, StateKind::Observed, obs.det_index, obs.box2d, obs.box3d, obs.pose});
        track.gap_run = 0;
    }
    for (std::int64_t r : assoc.unmatched_tracks) {
        Track& track = tracks_[live_[static_cast<std::size_t>(r)]];
        if (track.gap_run + 1 > cfg_.max_gap) {
            track.terminated = true;
            while (track.states.back().kind == StateKind::Predicted) track.states.pop_back();
            track.gap_run = 0;
            continue;
        }
        Prediction p = predictor_->predict(track, frame_index);
        track.states.push_back(
            {frame_index, StateKind::Predicted, std::nullopt, p.box2d, p.box3d, std::move(p.pose)});
        ++track.gap_run;
    }
    std::erase_if(live_, [this](std::size_t idx) { return tracks_[idx].terminated; });

    std::vector<std::size_t> spawn;
    for (std::int64_t c : assoc.unmatched_detections)
        if (observations[static_cast<std::size_t>(c)].score >= cfg_.min_track_score)
            spawn.push_back(static_cast<std::size_t>(c));
    std::stable_sort(spawn.begin(), spawn.end(), [&](std::size_t a, std::size_t b) {
        return observations[a].score > observations[b].score;
    });
    for (std::size_t c : spawn) {
        const Observation& obs = observations[c];
        Track track;
        track.track_id = next_id_++;
        track.birth_frame = frame_index;
        track.states.push_back({frame_index, StateKind::Observed, obs.det_index, obs.box2d, obs.box3d, obs.pose});
        live_.push_back(tracks_.size());
        tracks_.push_back(std::move(track));
    }
}

std::vector<Track> Tracker::finalize() {
    for (Track& track : tracks_) {
        while (!track.states.empty() && track.states.back().kind == StateKind::Predicted)
            track.states.pop_back();
        track.gap_run = 0;
    }
    live_.clear();
    return std::move(tracks_);
}

std::vector<LiftedFrame> lift_sequence(const SequenceInput& seq, const LiftingConfig& lifting) {
    validate(seq.camera);
    const auto lifter = make_lifter(lifting.lifter, lifting.options);
    std::vector<LiftedFrame> out;
    out.reserve(seq.frames.size());
    for (const FrameInput& frame : seq.frames) {
        LiftedFrame lifted{frame.frame_index, {}};
        try {
            if (!frame.detections.empty() && !frame.depth) throw Error("missing depth map");
            std::vector<Pose3D> poses;
            for (std::size_t i = 0; i < frame.detections.size(); ++i) {
                const Detection& det = frame.detections[i];
                Observation obs;
                obs.det_index = i;
                obs.score = det.score;
                obs.box2d = det.box;
                obs.box3d = lift_box(det.box, *frame.depth, det.mask, seq.camera, lifting.options);
                poses.push_back(lifter->lift(det, *frame.depth, seq.camera));
                lifted.observations.push_back(std::move(obs));
            }
            poses = place_relative(std::move(poses));
            for (std::size_t i = 0; i < poses.size(); ++i) lifted.observations[i].pose = std::move(poses[i]);
        } catch (const std::exception& e) {
            throw Error("frame " + std::to_string(frame.frame_index) + ": " + e.what());
        }
        out.push_back(std::move(lifted));
    }
    return out;
}

std::vector<Track> track_lifted(std::span<const LiftedFrame> frames, const TrackerConfig& cfg) {
    Tracker tracker(cfg);
    for (const LiftedFrame& frame : frames) tracker.step(frame.frame_index, frame.observations);
    return tracker.finalize();
}

std::vector<Track> run_sequence(const SequenceInput& seq, const TrackerConfig& cfg,
                                const LiftingConfig& lifting) {
    const auto lifted = lift_sequence(seq, lifting);
    return track_lifted(lifted, cfg);
}

}  // namespace poselift
