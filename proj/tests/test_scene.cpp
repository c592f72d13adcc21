#include <doctest.h>

#include <cmath>
#include <random>

#include "poselift/error.hpp"
#include "poselift/scene.hpp"
#include "support.hpp"

using namespace poselift;
using testing::cube_observation;

namespace {

std::vector<Track> run(const std::vector<std::vector<Observation>>& frames) {
    Tracker tr(TrackerConfig{});
    for (std::size_t f = 0; f < frames.size(); ++f) tr.step(std::int64_t(f), frames[f]);
    return tr.finalize();
}

}  // namespace

TEST_CASE("no tracks, no actors") {
    const auto doc = export_scene({}, 25.0, kDefaultSkeleton);
    CHECK(doc.actors.empty());
    CHECK(doc.metadata.units == "meters");
    CHECK(doc.metadata.joint_names == skeleton(kDefaultSkeleton).joint_names);
    CHECK(parse_scene(scene_to_json(doc)) == doc);
}

TEST_CASE("observed frames become observed samples") {
    std::vector<std::vector<Observation>> frames;
    for (int f = 0; f < 10; ++f) frames.push_back({cube_observation(0, 0.1 * f, 0, 4)});
    const auto tracks = run(frames);
    REQUIRE(tracks.size() == 1);
    const auto doc = export_scene(tracks, 30.0, kDefaultSkeleton);
    REQUIRE(doc.actors.size() == 1);
    const auto& a = doc.actors[0];
    CHECK(a.track_id == tracks[0].track_id);
    REQUIRE(a.samples.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(a.samples[i].frame == std::int64_t(i));
        CHECK_FALSE(a.samples[i].predicted);
        CHECK(a.samples[i].joints.size() == 15);
        CHECK(a.samples[i].joints[0] == tracks[0].states[i].pose.joints[0].position());
    }
}

TEST_CASE("a bridged gap shows up as predicted samples") {
    std::vector<std::vector<Observation>> frames;
    for (int f = 0; f < 10; ++f)
        frames.push_back(f >= 4 && f <= 6 ? std::vector<Observation>{} : std::vector{cube_observation(0, 0.05 * f, 0, 4)});
    const auto doc = export_scene(run(frames), 25.0, kDefaultSkeleton);
    REQUIRE(doc.actors.size() == 1);
    int predicted = 0;
    for (const auto& s : doc.actors[0].samples) {
        predicted += s.predicted;
        CHECK(s.predicted == (s.frame >= 4 && s.frame <= 6));
    }
    CHECK(predicted == 3);
}

TEST_CASE("JSON round trip is bit-exact") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10, 10);
    SceneDocument doc;
    doc.metadata.fps = 29.97;
    doc.metadata.engine_version = "x";
    doc.metadata.joint_names = skeleton(kDefaultSkeleton).joint_names;
    for (int a = 0; a < 3; ++a) {
        SceneActor actor{a, 2 * a, {}};
        for (int f = 0; f < 5; ++f) {
            SceneSample s{2 * a + f, f % 2 == 1, {}};
            for (int j = 0; j < 15; ++j) s.joints.push_back({u(rng), u(rng), std::nextafter(1.0 / 3.0, 1.0) * u(rng)});
            actor.samples.push_back(s);
        }
        doc.actors.push_back(actor);
    }
    CHECK_NOTHROW(validate(doc));
    const auto back = parse_scene(scene_to_json(doc));
    CHECK(back == doc);
    CHECK(scene_to_json(back) == scene_to_json(doc));

    testing::TempDir dir("scene");
    save_scene(dir / "s.json", doc);
    CHECK(load_scene(dir / "s.json") == doc);
}

TEST_CASE("invalid documents") {
    std::vector<std::vector<Observation>> frames{{cube_observation(0, 0, 0, 4)}};
    auto tracks = run(frames);
    SUBCASE("pose arity differs from the skeleton") {
        tracks[0].states[0].pose.joints.pop_back();
        CHECK_THROWS_AS(export_scene(tracks, 25.0, kDefaultSkeleton), ValidationError);
    }
    SUBCASE("non-contiguous samples") {
        auto doc = export_scene(tracks, 25.0, kDefaultSkeleton);
        auto s = doc.actors[0].samples[0];
        s.frame = 2;
        doc.actors[0].samples.push_back(s);
        CHECK_THROWS_AS(validate(doc), ValidationError);
    }
    SUBCASE("malformed text") { CHECK_THROWS_AS(parse_scene("{\"actors\": 1}"), ParseError); }
}
