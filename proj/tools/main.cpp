#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "poselift/config.hpp"
#include "poselift/error.hpp"
#include "poselift/ingest.hpp"
#include "poselift/metrics.hpp"
#include "poselift/scene.hpp"
#include "poselift/synth.hpp"
#include "poselift/track_io.hpp"
#include "poselift/tracking.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace poselift;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(path.string() + ": cannot write");
    return out;
}

struct TrackArgs {
    fs::path detections, depth_dir, config, out;
    std::string mode;
};

void cmd_track(const TrackArgs& a) {
    EngineConfig cfg = load_config(a.config);
    if (!a.mode.empty()) cfg.tracker.association_mode = parse_association_mode(a.mode);
    const auto frames = parse_detections(a.detections, cfg.skeleton);
    const SequenceInput seq = load_sequence(frames, a.depth_dir, cfg.camera, cfg.fps);
    const std::vector<Track> tracks = run_sequence(seq, cfg.tracker, cfg.lifting);

    auto out = open_out(a.out);
    write_tracks(out, tracks, cfg);
    if (!out) throw Error(a.out.string() + ": write failed");

    std::int64_t observed = 0, predicted = 0;
    for (const Track& t : tracks)
        for (const TrackState& s : t.states) ++(s.kind == StateKind::Observed ? observed : predicted);
    ordered_json summary;
    summary["tracks"] = tracks.size();
    summary["frames"] = seq.frames.size();
    summary["observed"] = observed;
    summary["predicted"] = predicted;
    summary["mode"] = to_string(cfg.tracker.association_mode);
    std::cout << summary.dump() << '\n';
}

struct EvalArgs {
    fs::path tracks, gt;
    std::string metric;
    double radius = MetricsConfig{}.radius;
    double tau = MetricsConfig{}.tau;
};

void cmd_eval(const EvalArgs& a) {
    const TrackFile pred = load_tracks(a.tracks);
    const TrackFile gt_file = load_tracks(a.gt);
    if (pred.skeleton_id != gt_file.skeleton_id)
        throw ValidationError("skeleton mismatch: " + a.tracks.string() + " uses '" + pred.skeleton_id + "', " +
                              a.gt.string() + " uses '" + gt_file.skeleton_id + "'");
    const GroundTruth gt = ground_truth_from_tracks(gt_file.tracks);

    ordered_json report;
    report["metric"] = a.metric;
    if (a.metric == "mota") {
        const MotReport r = mota(gt, pred.tracks, a.radius);
        report["mota"] = r.mota;
        report["misses"] = r.misses;
        report["false_positives"] = r.false_positives;
        report["id_switches"] = r.id_switches;
        report["matches"] = r.matches;
        report["gt_total"] = r.gt_total;
        report["radius"] = r.radius;
    } else {
        const MotReport check = mota(gt, pred.tracks, a.radius);  // rejects empty GT
        (void)check;
        const std::vector<PosePair> pairs = matched_pose_pairs(gt, pred.tracks, a.radius);
        const PckReport r = pck3d_rel(pairs, a.tau);
        if (a.metric == "pck3d") {
            report["pck3d_rel"] = r.pck_rel;
            report["tau"] = r.tau;
            report["joints_evaluated"] = r.joints_evaluated;
            ordered_json per_joint = ordered_json::object();
            for (const PckJoint& j : r.per_joint) per_joint[j.name] = j.pck;
            report["per_joint"] = std::move(per_joint);
        } else {
            report["auc_rel"] = r.auc_rel;
            report["joints_evaluated"] = r.joints_evaluated;
        }
        report["radius"] = a.radius;
        report["pairs"] = pairs.size();
    }
    std::cout << report.dump(2) << '\n';
}

struct SynthArgs {
    std::string scenario;
    fs::path out_dir;
    std::uint64_t seed = 0;
    double noise = -1.0;
    bool seed_set = false;
};

void cmd_synth(const SynthArgs& a) {
    synth::Scenario sc;
    if (fs::is_regular_file(a.scenario))
        sc = synth::load_scenario(a.scenario);
    else
        sc = synth::builtin(a.scenario);
    if (a.seed_set) sc.seed = a.seed;
    if (a.noise >= 0.0) sc.noise.depth_sigma = a.noise;
    const synth::Rendered r = synth::generate(sc);
    synth::write_dataset(sc, r, a.out_dir);

    std::size_t detections = 0;
    for (const auto& f : r.sequence.frames) detections += f.detections.size();
    ordered_json summary;
    summary["scenario"] = sc.name;
    summary["frames"] = sc.frames;
    summary["persons"] = sc.persons.size();
    summary["detections"] = detections;
    std::cout << summary.dump() << '\n';
}

struct ExportArgs {
    fs::path tracks, out;
    double fps = 25.0;
};

void cmd_export(const ExportArgs& a) {
    const TrackFile file = load_tracks(a.tracks);
    const SceneDocument doc = export_scene(file.tracks, a.fps, file.skeleton_id);
    save_scene(a.out, doc);
    std::size_t samples = 0;
    for (const auto& actor : doc.actors) samples += actor.samples.size();
    ordered_json summary;
    summary["actors"] = doc.actors.size();
    summary["samples"] = samples;
    std::cout << summary.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"3D multi-person pose lifting and tracking"};
    app.set_version_flag("--version", std::string(kEngineVersion));
    app.require_subcommand(1);

    TrackArgs track;
    auto* t = app.add_subcommand("track", "Lift and track detections into a tracks file");
    t->add_option("--detections", track.detections, "Detections JSON-lines file")->required()->check(CLI::ExistingFile);
    t->add_option("--depth-dir", track.depth_dir, "Directory of <frame>.dpt rasters")->required();
    t->add_option("--config", track.config, "Engine config JSON")->required()->check(CLI::ExistingFile);
    t->add_option("--out", track.out, "Output tracks file")->required();
    t->add_option("--mode", track.mode, "Association mode")->check(CLI::IsMember({"iou3d", "iou2d"}));

    EvalArgs eval;
    auto* e = app.add_subcommand("eval", "Score a tracks file against ground truth");
    e->add_option("--tracks", eval.tracks, "Tracks file")->required()->check(CLI::ExistingFile);
    e->add_option("--gt", eval.gt, "Ground-truth file")->required()->check(CLI::ExistingFile);
    e->add_option("--metric", eval.metric, "mota, pck3d or auc")
        ->required()
        ->check(CLI::IsMember({"mota", "pck3d", "auc"}));
    e->add_option("--radius", eval.radius, "Root matching radius, meters")->check(CLI::PositiveNumber);
    e->add_option("--tau", eval.tau, "PCK threshold, meters")->check(CLI::PositiveNumber);

    SynthArgs syn;
    auto* s = app.add_subcommand("synth", "Render a synthetic scenario to disk");
    s->add_option("--scenario", syn.scenario, "Builtin name or scenario JSON file")->required();
    s->add_option("--out-dir", syn.out_dir, "Output directory")->required();
    auto* seed_opt = s->add_option("--seed", syn.seed, "Noise seed");
    s->add_option("--noise", syn.noise, "Depth noise sigma, meters")->check(CLI::NonNegativeNumber);

    ExportArgs exp;
    auto* x = app.add_subcommand("export", "Export a tracks file as an animation scene");
    x->add_option("--tracks", exp.tracks, "Tracks file")->required()->check(CLI::ExistingFile);
    x->add_option("--out", exp.out, "Output scene JSON")->required();
    x->add_option("--fps", exp.fps, "Frames per second")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : kExitUsage;
    }
    syn.seed_set = seed_opt->count() > 0;

    try {
        if (*t) cmd_track(track);
        else if (*e) cmd_eval(eval);
        else if (*s) cmd_synth(syn);
        else if (*x) cmd_export(exp);
    } catch (const std::exception& ex) {
        std::cerr << "poselift: error: " << ex.what() << '\n';
        return kExitRuntime;
    }
    return EXIT_SUCCESS;
}
