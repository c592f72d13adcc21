#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "poselift/error.hpp"
#include "poselift/geometry.hpp"
#include "support.hpp"

using namespace poselift;

namespace {

Box3D random_box(std::mt19937_64& rng, double span = 4.0) {
    std::uniform_real_distribution<double> pos(-span, span), ext(0.05, 3.0);
    const double x = pos(rng), y = pos(rng), z = pos(rng);
    return {x, x + ext(rng), y, y + ext(rng), z, z + ext(rng)};
}

// Coordinates on a 1/64 grid so sums and differences are exact in binary.
Box3D dyadic_box(std::mt19937_64& rng) {
    auto g = [&](int lo, int hi) { return double(std::int64_t(rng() % std::uint64_t(hi - lo)) + lo) / 64.0; };
    const double x = g(-256, 256), y = g(-256, 256), z = g(-256, 256);
    return {x, x + g(1, 192), y, y + g(1, 192), z, z + g(1, 192)};
}

bool disjoint(const Box3D& a, const Box3D& b) {
    return a.x_max <= b.x_min || b.x_max <= a.x_min || a.y_max <= b.y_min || b.y_max <= a.y_min ||
           a.z_max <= b.z_min || b.z_max <= a.z_min;
}

}  // namespace

TEST_CASE("iou3d examples") {
    const Box3D a{0, 2, 0, 2, 0, 2};
    CHECK(iou3d(a, a) == 1.0);
    CHECK(iou3d(a, a.translated(0, 0, 2.5)) == 0.0);
    const Box3D b{1, 3, 0, 2, 0, 2};
    CHECK(iou3d(a, b) == doctest::Approx(4.0 / 12.0).epsilon(1e-12));
    CHECK(std::abs(iou3d(a, b) - testing::voxel_iou(a, b, 0.01)) <= 1e-3);
}

TEST_CASE("iou2d examples") {
    const Box2D a{0, 0, 2, 2};
    CHECK(iou2d(a, a) == 1.0);
    CHECK(iou2d(a, {5, 5, 6, 6}) == 0.0);
    CHECK(iou2d(a, {1, 0, 3, 2}) == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("iou3d properties on random boxes") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const Box3D a = random_box(rng), b = random_box(rng);
        const double v = iou3d(a, b);
        CHECK(v == iou3d(b, a));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK((v == 0.0) == disjoint(a, b));
        CHECK(iou3d(a, a) == 1.0);
        if (!(a == b)) CHECK(v < 1.0);
    }
}

TEST_CASE("iou3d is exactly translation invariant on representable translations") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 2000; ++i) {
        const Box3D a = dyadic_box(rng), b = dyadic_box(rng);
        const Box3D t = dyadic_box(rng);
        CHECK(iou3d(a.translated(t.x_min, t.y_min, t.z_min), b.translated(t.x_min, t.y_min, t.z_min)) ==
              iou3d(a, b));
    }
    std::uniform_real_distribution<double> u(-20.0, 20.0), s(0.1, 3.0);
    for (int i = 0; i < 2000; ++i) {
        const Box3D a{u(rng), 0, u(rng), 0, u(rng), 0};
        const Box3D a1{a.x_min, a.x_min + s(rng), a.y_min, a.y_min + s(rng), a.z_min, a.z_min + s(rng)};
        const Box3D b1{a.x_min + u(rng) / 10, 0, a.y_min + u(rng) / 10, 0, a.z_min + u(rng) / 10, 0};
        const Box3D b{b1.x_min, b1.x_min + s(rng), b1.y_min, b1.y_min + s(rng), b1.z_min, b1.z_min + s(rng)};
        const double dx = u(rng), dy = u(rng), dz = u(rng);
        CHECK(std::abs(iou3d(a1.translated(dx, dy, dz), b.translated(dx, dy, dz)) - iou3d(a1, b)) <= 1e-12);
    }
}

TEST_CASE("iou3d agrees with the voxel oracle on grid-aligned boxes") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 200; ++i) {
        // 1/64 m corners: a 1/64 m voxel grid counts volumes exactly
        Box3D a = dyadic_box(rng), b = dyadic_box(rng);
        b = b.translated(a.x_min - b.x_min, a.y_min - b.y_min, a.z_min - b.z_min)
                .translated(double(std::int64_t(rng() % 64) - 32) / 64.0, double(std::int64_t(rng() % 64) - 32) / 64.0,
                            double(std::int64_t(rng() % 64) - 32) / 64.0);
        CHECK(std::abs(iou3d(a, b) - testing::voxel_iou(a, b, 1.0 / 64.0)) <= 1e-12);
    }
}

TEST_CASE("iou3d lies within Monte-Carlo error bars") {
    std::mt19937_64 rng(14), mc(15);
    int outside_3sigma = 0, total = 0;
    for (int i = 0; i < 300; ++i) {
        const Box3D a = random_box(rng, 1.0), b = random_box(rng, 1.0);
        const auto est = testing::monte_carlo_iou(a, b, 20000, mc);
        if (est.sigma == 0.0) continue;
        ++total;
        const double dev = std::abs(iou3d(a, b) - est.iou);
        CHECK(dev <= 5.0 * est.sigma + 1e-12);
        outside_3sigma += dev > 3.0 * est.sigma;
    }
    // a correct estimator leaves the 3-sigma band ~0.3% of the time
    CHECK(outside_3sigma <= total / 50 + 1);
}

TEST_CASE("depth_extrema examples") {
    const Box2D whole{0, 0, 4, 4};
    SUBCASE("constant depth") {
        const auto d = testing::constant_depth(4, 4, 5.0f);
        const auto r = depth_extrema(d, testing::rect_mask(4, 4, 1, 1, 3, 3), whole);
        CHECK(r.z_min == 5.0);
        CHECK(r.z_max == 5.0);
    }
    SUBCASE("three mask pixels") {
        auto d = testing::constant_depth(4, 4, 9.0f);
        d.values[1] = 4.0f;
        d.values[6] = 1.5f;
        d.values[11] = 7.25f;
        const std::vector<std::int64_t> idx{1, 6, 11};
        const auto r = depth_extrema(d, encode_mask(4, 4, idx), whole);
        CHECK(r.z_min == 1.5);
        CHECK(r.z_max == 7.25);
    }
    SUBCASE("invalid depth only") {
        const auto d = testing::constant_depth(4, 4, 0.0f);
        CHECK_THROWS_AS(depth_extrema(d, testing::rect_mask(4, 4, 0, 0, 2, 2), whole), EmptySupport);
    }
    SUBCASE("mask outside the box") {
        const auto d = testing::constant_depth(4, 4, 2.0f);
        CHECK_THROWS_AS(depth_extrema(d, testing::rect_mask(4, 4, 0, 0, 1, 1), {2, 2, 4, 4}), EmptySupport);
    }
    SUBCASE("dimension mismatch") {
        const auto d = testing::constant_depth(5, 4, 2.0f);
        CHECK_THROWS_AS(depth_extrema(d, testing::rect_mask(4, 4, 0, 0, 1, 1), whole), ValidationError);
    }
}

TEST_CASE("depth_extrema matches an exhaustive scan") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<float> depth(0.5f, 20.0f);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const int w = 2 + int(rng() % 30), h = 2 + int(rng() % 30);
        DepthMap d{w, h, {}};
        for (int i = 0; i < w * h; ++i) d.values.push_back(unit(rng) < 0.15 ? 0.0f : depth(rng));
        std::vector<std::int64_t> idx;
        for (std::int64_t i = 0; i < std::int64_t(w) * h; ++i)
            if (unit(rng) < 0.4) idx.push_back(i);
        if (idx.empty()) continue;
        const Mask2D mask = encode_mask(w, h, idx);
        double x0 = unit(rng) * w, x1 = unit(rng) * w, y0 = unit(rng) * h, y1 = unit(rng) * h;
        if (x0 == x1 || y0 == y1) continue;
        const Box2D box{std::min(x0, x1), std::min(y0, y1), std::max(x0, x1), std::max(y0, y1)};
        const auto support = testing::scan_support(d, mask, box);
        if (support.empty()) {
            CHECK_THROWS_AS(depth_extrema(d, mask, box), EmptySupport);
            continue;
        }
        ++checked;
        const auto r = depth_extrema(d, mask, box);
        CHECK(r.z_min == *std::min_element(support.begin(), support.end()));
        CHECK(r.z_max == *std::max_element(support.begin(), support.end()));
        const auto p = depth_extrema(d, mask, box, 5.0);
        CHECK(p.z_min == doctest::Approx(testing::sorted_percentile(support, 5.0)).epsilon(1e-12));
        CHECK(p.z_max == doctest::Approx(testing::sorted_percentile(support, 95.0)).epsilon(1e-12));
    }
    CHECK(checked > 200);
}

TEST_CASE("percentile clipping ignores a single outlier") {
    auto d = testing::constant_depth(20, 20, 3.0f);
    d.values[5 * 20 + 5] = 40.0f;
    const auto mask = testing::rect_mask(20, 20, 0, 0, 20, 20);
    CHECK(depth_extrema(d, mask, {0, 0, 20, 20}, 0.0).z_max == 40.0);
    CHECK(depth_extrema(d, mask, {0, 0, 20, 20}, 1.0).z_max == 3.0);
}

TEST_CASE("lift_box examples") {
    const CameraModel cam{1, 1, 0, 0, 1};
    const auto d = testing::constant_depth(4, 4, 4.0f);
    const auto mask = testing::rect_mask(4, 4, 1, 1, 2, 2);
    const Box3D b = lift_box({1, 1, 2, 2}, d, mask, cam, {0.2, 0.0});
    CHECK(b.x_min == 4.0);
    CHECK(b.x_max == 8.0);
    CHECK(b.y_min == 4.0);
    CHECK(b.y_max == 8.0);
    CHECK(b.z_min == doctest::Approx(3.9).epsilon(1e-12));
    CHECK(b.z_max == doctest::Approx(4.1).epsilon(1e-12));

    SUBCASE("symmetric about the principal point") {
        const CameraModel c{100, 100, 2, 2, 1};
        const Box3D s = lift_box({1, 1, 3, 3}, d, testing::rect_mask(4, 4, 1, 1, 3, 3), c);
        CHECK(s.x_min == -s.x_max);
        CHECK(s.y_min == -s.y_max);
    }
    SUBCASE("empty support") {
        CHECK_THROWS_AS(lift_box({1, 1, 2, 2}, testing::constant_depth(4, 4, 0.0f), mask, cam), EmptySupport);
    }
    SUBCASE("thick boxes are not inflated") {
        auto v = testing::constant_depth(4, 4, 2.0f);
        v.values[1 * 4 + 2] = 3.0f;
        const Box3D t = lift_box({1, 1, 3, 2}, v, testing::rect_mask(4, 4, 1, 1, 3, 2), cam, {0.2, 0.0});
        CHECK(t.z_min == 2.0);
        CHECK(t.z_max == 3.0);
        CHECK(t.x_min == 2.5);  // u=1 at z_mid 2.5
    }
    SUBCASE("world scale multiplies every coordinate") {
        const Box3D s = lift_box({1, 1, 2, 2}, d, mask, {1, 1, 0, 0, 2}, {0.2, 0.0});
        CHECK(s.x_min == 8.0);
        CHECK(s.z_min == doctest::Approx(7.9).epsilon(1e-12));
    }
}

TEST_CASE("lift_box preserves the depth order of persons") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<float> z(0.5f, 15.0f);
    const CameraModel cam{300, 300, 16, 16, 1};
    for (int trial = 0; trial < 200; ++trial) {
        DepthMap d{32, 32, std::vector<float>(32 * 32, 0.0f)};
        const float za = z(rng), zb = z(rng);
        for (int r = 0; r < 32; ++r)
            for (int c = 0; c < 32; ++c) d.values[std::size_t(r) * 32 + c] = c < 16 ? za : zb;
        const Box3D a = lift_box({0, 0, 16, 32}, d, testing::rect_mask(32, 32, 0, 0, 16, 32), cam);
        const Box3D b = lift_box({16, 0, 32, 32}, d, testing::rect_mask(32, 32, 16, 0, 32, 32), cam);
        CHECK((za < zb) == (a.z_min < b.z_min));
    }
}

TEST_CASE("Box3D validation") {
    CHECK_NOTHROW(validate(Box3D{0, 1, 0, 1, 0, 1}));
    CHECK_THROWS_AS(validate(Box3D{0, 1, 0, 1, 1, 1}), ValidationError);
    CHECK_THROWS_AS(validate(Box3D{0, NAN, 0, 1, 0, 1}), ValidationError);
}
