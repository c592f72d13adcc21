#include "poselift/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "poselift/assignment.hpp"
#include "poselift/error.hpp"

namespace poselift {

namespace {

double root_distance(const Pose3D& a, const Pose3D& b) {
    const Joint3D& ra = a.root();
    const Joint3D& rb = b.root();
    return std::hypot(ra.x - rb.x, ra.y - rb.y, ra.z - rb.z);
}

struct FrameMatch {
    std::int64_t frame = 0;
    std::vector<const PoseEntry*> gts;
    std::vector<PoseEntry> preds;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // indices into gts / preds
};

// CLEAR-MOT correspondence over the GT frame range. Calls `visit` per frame
// after matching, and `on_match(gt_id, track_id)` for identity bookkeeping.
template <typename Visit>
void accumulate(const GroundTruth& gt, std::span<const Track> tracks, double radius, Visit visit) {
    if (!(radius > 0.0)) throw ValidationError("match radius must be positive");
    validate(gt);
    if (gt.frames.empty()) throw ValidationError("GroundTruth: no frames, MOTA undefined");
    const std::int64_t first = gt.frames.front().frame, last = gt.frames.back().frame;

    std::map<std::int64_t, std::vector<PoseEntry>> hyps;
    for (const Track& track : tracks)
        for (const TrackState& s : track.states)
            if (s.frame >= first && s.frame <= last) hyps[s.frame].push_back({track.track_id, s.pose});

    std::map<std::int64_t, std::int64_t> previous;  // gt id -> last matched track id
    std::size_t gi = 0;
    for (std::int64_t f = first; f <= last; ++f) {
        FrameMatch fm;
        fm.frame = f;
        if (gi < gt.frames.size() && gt.frames[gi].frame == f) {
            for (const auto& p : gt.frames[gi].persons) fm.gts.push_back(&p);
            ++gi;
        }
        std::sort(fm.gts.begin(), fm.gts.end(), [](auto* a, auto* b) { return a->id < b->id; });
        if (auto it = hyps.find(f); it != hyps.end()) fm.preds = std::move(it->second);
        std::sort(fm.preds.begin(), fm.preds.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

        std::vector<char> gt_done(fm.gts.size(), 0), pred_done(fm.preds.size(), 0);
        // Keep last frame's correspondence while it is still within the radius.
        for (std::size_t g = 0; g < fm.gts.size(); ++g) {
            auto prev = previous.find(fm.gts[g]->id);
            if (prev == previous.end()) continue;
            for (std::size_t p = 0; p < fm.preds.size(); ++p) {
                if (pred_done[p] || fm.preds[p].id != prev->second) continue;
                if (root_distance(fm.gts[g]->pose, fm.preds[p].pose) <= radius) {
                    fm.pairs.emplace_back(g, p);
                    gt_done[g] = pred_done[p] = 1;
                }
                break;
            }
        }
        std::vector<PoseEntry> rest_gt, rest_pred;
        std::vector<std::size_t> gt_idx, pred_idx;
        for (std::size_t g = 0; g < fm.gts.size(); ++g)
            if (!gt_done[g]) {
                rest_gt.push_back(*fm.gts[g]);
                gt_idx.push_back(g);
            }
        for (std::size_t p = 0; p < fm.preds.size(); ++p)
            if (!pred_done[p]) {
                rest_pred.push_back(fm.preds[p]);
                pred_idx.push_back(p);
            }
        const auto extra = match_frame(rest_gt, rest_pred, radius);
        for (const auto& [gid, tid] : extra) {
            std::size_t g = 0, p = 0;
            while (rest_gt[g].id != gid) ++g;
            while (rest_pred[p].id != tid) ++p;
            fm.pairs.emplace_back(gt_idx[g], pred_idx[p]);
        }
        visit(fm, previous);
        for (const auto& [g, p] : fm.pairs) previous[fm.gts[g]->id] = fm.preds[p].id;
    }
}

}  // namespace

void validate(const GroundTruth& gt) {
    for (std::size_t i = 0; i < gt.frames.size(); ++i) {
        if (i > 0 && gt.frames[i].frame <= gt.frames[i - 1].frame)
            throw ValidationError("GroundTruth: frames not strictly increasing");
        std::set<std::int64_t> ids;
        for (const auto& p : gt.frames[i].persons) {
            if (!ids.insert(p.id).second)
                throw ValidationError("GroundTruth: duplicate gt_id " + std::to_string(p.id) + " in frame " +
                                      std::to_string(gt.frames[i].frame));
            validate(p.pose);
        }
    }
}

GroundTruth ground_truth_from_tracks(std::span<const Track> tracks) {
    std::map<std::int64_t, std::vector<PoseEntry>> frames;
    for (const Track& t : tracks)
        for (const TrackState& s : t.states) frames[s.frame].push_back({t.track_id, s.pose});
    GroundTruth gt;
    for (auto& [f, persons] : frames) gt.frames.push_back({f, std::move(persons)});
    validate(gt);
    return gt;
}

std::vector<std::pair<std::int64_t, std::int64_t>> match_frame(std::span<const PoseEntry> gts,
                                                                std::span<const PoseEntry> preds,
                                                                double radius) {
    if (!(radius > 0.0)) throw ValidationError("match radius must be positive");
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    if (gts.empty() || preds.empty()) return out;

    // Out-of-radius pairs cost more than any set of in-radius pairs combined,
    // so the solver maximises match count before minimising distance.
    const double forbidden = radius * static_cast<double>(std::min(gts.size(), preds.size()) + 1) + 1.0;
    Matrix cost(gts.size(), preds.size());
    for (std::size_t g = 0; g < gts.size(); ++g)
        for (std::size_t p = 0; p < preds.size(); ++p) {
            const double d = root_distance(gts[g].pose, preds[p].pose);
            cost(g, p) = d <= radius ? d : forbidden;
        }
    const auto assignment = solve_assignment(cost);
    for (std::size_t g = 0; g < gts.size(); ++g) {
        const int p = assignment[g];
        if (p >= 0 && cost(g, static_cast<std::size_t>(p)) <= radius)
            out.emplace_back(gts[g].id, preds[static_cast<std::size_t>(p)].id);
    }
    return out;
}

MotReport mota(const GroundTruth& gt, std::span<const Track> tracks, double radius) {
    MotReport report;
    report.radius = radius;
    accumulate(gt, tracks, radius, [&](const FrameMatch& fm, const std::map<std::int64_t, std::int64_t>& previous) {
        MotFrame mf;
        mf.frame = fm.frame;
        mf.gt = static_cast<std::int64_t>(fm.gts.size());
        mf.hypotheses = static_cast<std::int64_t>(fm.preds.size());
        mf.matches = static_cast<std::int64_t>(fm.pairs.size());
        mf.misses = mf.gt - mf.matches;
        mf.false_positives = mf.hypotheses - mf.matches;
        for (const auto& [g, p] : fm.pairs) {
            auto prev = previous.find(fm.gts[g]->id);
            if (prev != previous.end() && prev->second != fm.preds[p].id) ++mf.id_switches;
        }
        report.gt_total += mf.gt;
        report.matches += mf.matches;
        report.misses += mf.misses;
        report.false_positives += mf.false_positives;
        report.id_switches += mf.id_switches;
        report.per_frame.push_back(mf);
    });
    if (report.gt_total == 0) throw ValidationError("GroundTruth: no objects, MOTA undefined");
    report.mota = 1.0 - static_cast<double>(report.misses + report.false_positives + report.id_switches) /
                            static_cast<double>(report.gt_total);
    return report;
}

std::vector<PosePair> matched_pose_pairs(const GroundTruth& gt, std::span<const Track> tracks, double radius) {
    std::vector<PosePair> out;
    accumulate(gt, tracks, radius, [&](const FrameMatch& fm, const auto&) {
        for (const auto& [g, p] : fm.pairs) out.push_back({fm.gts[g]->pose, fm.preds[p].pose});
    });
    return out;
}

std::vector<double> auc_thresholds() {
    std::vector<double> t;
    for (int k = 1; k <= 30; ++k) t.push_back(k / 200.0);
    return t;
}

namespace {

struct JointErrors {
    std::vector<std::vector<double>> per_joint;  // root-aligned errors of GT-valid joints
    std::vector<std::vector<double>> per_sequence;
};

JointErrors collect_errors(std::span<const PckSequence> sequences) {
    JointErrors out;
    std::string skel;
    for (const auto& seq : sequences) {
        out.per_sequence.emplace_back();
        for (const auto& pair : seq.pairs) {
            validate(pair.gt);
            validate(pair.pred);
            if (pair.gt.skeleton_id != pair.pred.skeleton_id || (!skel.empty() && skel != pair.gt.skeleton_id))
                throw ValidationError("PCK: skeleton mismatch ('" + pair.gt.skeleton_id + "' vs '" +
                                      pair.pred.skeleton_id + "')");
            skel = pair.gt.skeleton_id;
            if (out.per_joint.empty()) out.per_joint.resize(pair.gt.joints.size());
            const Joint3D& gr = pair.gt.root();
            const Joint3D& pr = pair.pred.root();
            for (std::size_t j = 0; j < pair.gt.joints.size(); ++j) {
                const Joint3D& g = pair.gt.joints[j];
                if (!(g.confidence > 0.0)) continue;
                const Joint3D& p = pair.pred.joints[j];
                const double err = std::hypot((p.x - pr.x) - (g.x - gr.x), (p.y - pr.y) - (g.y - gr.y),
                                              (p.z - pr.z) - (g.z - gr.z));
                out.per_joint[j].push_back(err);
                out.per_sequence.back().push_back(err);
            }
        }
    }
    return out;
}

double percent_within(std::span<const double> errors, double tau) {
    if (errors.empty()) return 0.0;
    const auto ok = std::count_if(errors.begin(), errors.end(),
                                  [tau](double e) { return e <= tau + kPckBoundarySlack; });
    return 100.0 * static_cast<double>(ok) / static_cast<double>(errors.size());
}

}  // namespace

PckReport pck3d_rel(std::span<const PckSequence> sequences, double tau) {
    if (!(tau > 0.0)) throw ValidationError("PCK: tau must be positive");
    const JointErrors errs = collect_errors(sequences);
    std::vector<double> all;
    for (const auto& v : errs.per_joint) all.insert(all.end(), v.begin(), v.end());

    PckReport report;
    report.tau = tau;
    report.joints_evaluated = static_cast<std::int64_t>(all.size());
    report.pck_rel = percent_within(all, tau);
    const auto grid = auc_thresholds();
    double sum = 0.0;
    for (double t : grid) sum += percent_within(all, t);
    report.auc_rel = sum / static_cast<double>(grid.size());

    if (!errs.per_joint.empty()) {
        std::string skel;
        for (const auto& seq : sequences)
            if (!seq.pairs.empty()) {
                skel = seq.pairs.front().gt.skeleton_id;
                break;
            }
        const auto def = skeleton(skel);
        for (std::size_t j = 0; j < errs.per_joint.size(); ++j)
            report.per_joint.push_back({def.joint_names[j], percent_within(errs.per_joint[j], tau),
                                        static_cast<std::int64_t>(errs.per_joint[j].size())});
    }
    for (std::size_t s = 0; s < sequences.size(); ++s)
        report.per_sequence.emplace_back(sequences[s].name, percent_within(errs.per_sequence[s], tau));
    return report;
}

PckReport pck3d_rel(std::span<const PosePair> pairs, double tau) {
    const PckSequence seq{"all", {pairs.begin(), pairs.end()}};
    return pck3d_rel(std::span<const PckSequence>(&seq, 1), tau);
}

double auc_rel(std::span<const PosePair> pairs) {
    double sum = 0.0;
    const auto grid = auc_thresholds();
    for (double t : grid) sum += pck3d_rel(pairs, t).pck_rel;
    return sum / static_cast<double>(grid.size());
}

}  // namespace poselift
