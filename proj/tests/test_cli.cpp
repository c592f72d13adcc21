#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "poselift/metrics.hpp"
#include "poselift/track_io.hpp"
#include "process.hpp"
#include "support.hpp"

using namespace poselift;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

testing::ProcessResult cli(const std::string& args, const testing::TempDir& scratch) {
    return testing::run_process(POSELIFT_CLI_PATH, args, scratch.path());
}

std::string q(const fs::path& p) { return testing::quote(p.string()); }

std::string track_args(const fs::path& data, const fs::path& out) {
    return "track --detections " + q(data / "detections.jsonl") + " --depth-dir " + q(data / "depth") +
           " --config " + q(data / "config.json") + " --out " + q(out);
}

Track static_track(std::int64_t id, std::int64_t first, std::int64_t last, Point3 root) {
    Track t;
    t.track_id = id;
    t.birth_frame = first;
    for (std::int64_t f = first; f <= last; ++f) {
        TrackState s;
        s.frame = f;
        s.pose = testing::pose_at(root);
        s.box3d = testing::cube(root.x, root.y, root.z, 0.5);
        t.states.push_back(s);
    }
    return t;
}

void write_track_file(const fs::path& p, const std::vector<Track>& tracks) {
    std::ofstream out(p, std::ios::binary);
    write_tracks_minimal(out, tracks, std::string(kDefaultSkeleton));
}

}  // namespace

TEST_CASE("synth, track, eval and export end to end") {
    testing::TempDir dir("cli");
    const auto data = dir / "data";
    auto r = cli("synth --scenario full_occlusion --out-dir " + q(data), dir);
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["persons"] == 1);

    r = cli(track_args(data, dir / "tracks.jsonl"), dir);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const json summary = json::parse(r.out);
    CHECK(summary["tracks"] == 1);
    CHECK(summary["predicted"].get<int>() > 0);

    r = cli("eval --tracks " + q(dir / "tracks.jsonl") + " --gt " + q(data / "gt.jsonl") + " --metric mota", dir);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(json::parse(r.out)["mota"].get<double>() == 1.0);

    for (const char* metric : {"pck3d", "auc"}) {
        r = cli("eval --tracks " + q(dir / "tracks.jsonl") + " --gt " + q(data / "gt.jsonl") + " --metric " + metric, dir);
        REQUIRE_MESSAGE(r.code == 0, r.err);
        const json rep = json::parse(r.out);
        CHECK(rep["joints_evaluated"].get<int>() > 0);
    }

    r = cli("export --tracks " + q(dir / "tracks.jsonl") + " --out " + q(dir / "scene.json") + " --fps 30", dir);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(json::parse(r.out)["actors"] == 1);
    CHECK(json::parse(testing::slurp(dir / "scene.json"))["metadata"]["fps"] == 30.0);
}

TEST_CASE("a missing depth raster names its frame") {
    testing::TempDir dir("cli");
    const auto data = dir / "data";
    REQUIRE(cli("synth --scenario parallel_walk --out-dir " + q(data), dir).code == 0);
    fs::remove(data / "depth" / "7.dpt");
    const auto r = cli(track_args(data, dir / "tracks.jsonl"), dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("frame 7") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
    testing::TempDir dir("cli");
    write_track_file(dir / "t.jsonl", {static_track(0, 0, 3, {0, 0, 5})});
    CHECK(cli("eval --tracks " + q(dir / "t.jsonl") + " --gt " + q(dir / "t.jsonl") + " --metric bogus", dir).code == 2);
    CHECK(cli("", dir).code == 2);
    CHECK(cli("track --detections " + q(dir / "nope.jsonl"), dir).code == 2);
    CHECK(cli("--help", dir).code == 0);
}

TEST_CASE("runtime errors exit with 1") {
    testing::TempDir dir("cli");
    auto r = cli("synth --scenario no_such_scene --out-dir " + q(dir / "x"), dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("no_such_scene") != std::string::npos);
    write_track_file(dir / "empty.jsonl", {});
    write_track_file(dir / "t.jsonl", {static_track(0, 0, 3, {0, 0, 5})});
    r = cli("eval --tracks " + q(dir / "t.jsonl") + " --gt " + q(dir / "empty.jsonl") + " --metric mota", dir);
    CHECK(r.code == 1);
}

TEST_CASE("eval reproduces hand-counted MOTA") {
    testing::TempDir dir("cli");
    const std::vector<Track> gt{static_track(0, 0, 9, {0, 0, 5}), static_track(1, 0, 9, {3, 0, 5})};
    write_track_file(dir / "gt.jsonl", gt);
    const auto eval = [&](const std::string& tracks) {
        const auto r = cli("eval --tracks " + q(dir / tracks) + " --gt " + q(dir / "gt.jsonl") + " --metric mota", dir);
        REQUIRE_MESSAGE(r.code == 0, r.err);
        return json::parse(r.out);
    };
    SUBCASE("tracks equal to ground truth") {
        CHECK(eval("gt.jsonl")["mota"].get<double>() == 1.0);
    }
    SUBCASE("two misses, one false positive, one switch") {
        write_track_file(dir / "t.jsonl", {static_track(10, 0, 2, {0.05, 0, 5}), static_track(11, 0, 9, {3, 0.1, 5}),
                                           static_track(12, 5, 9, {0, 0, 5.1}), static_track(13, 7, 7, {10, 0, 5})});
        const json rep = eval("t.jsonl");
        CHECK(rep["mota"].get<double>() == doctest::Approx(0.8).epsilon(1e-15));
        CHECK(rep["misses"] == 2);
        CHECK(rep["false_positives"] == 1);
        CHECK(rep["id_switches"] == 1);
    }
}

TEST_CASE("synth is reproducible and noise only touches depth") {
    testing::TempDir dir("cli");
    for (const char* sub : {"a", "b"})
        REQUIRE(cli("synth --scenario three_person_mix --seed 42 --out-dir " + q(dir / sub), dir).code == 0);
    CHECK(testing::same_tree(dir / "a", dir / "b"));

    REQUIRE(cli("synth --scenario three_person_mix --seed 42 --noise 0.05 --out-dir " + q(dir / "n"), dir).code == 0);
    CHECK(testing::slurp(dir / "n" / "gt.jsonl") == testing::slurp(dir / "a" / "gt.jsonl"));
    CHECK(testing::slurp(dir / "n" / "depth" / "0.dpt") != testing::slurp(dir / "a" / "depth" / "0.dpt"));
}
