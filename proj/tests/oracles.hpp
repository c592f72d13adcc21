#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "poselift/geometry.hpp"

namespace testing {

using namespace poselift;

/// IOU from counting voxel centres of a regular grid with spacing `h` that
/// fall inside each box.
inline double voxel_iou(const Box3D& a, const Box3D& b, double h) {
    const double x0 = std::min(a.x_min, b.x_min), x1 = std::max(a.x_max, b.x_max);
    const double y0 = std::min(a.y_min, b.y_min), y1 = std::max(a.y_max, b.y_max);
    const double z0 = std::min(a.z_min, b.z_min), z1 = std::max(a.z_max, b.z_max);
    auto count = [h](double lo, double hi, double origin) {
        // number of centres origin + (k + 0.5) h in [lo, hi)
        const double first = std::ceil((lo - origin) / h - 0.5);
        const double last = std::ceil((hi - origin) / h - 0.5);
        return std::max(0.0, last - first);
    };
    auto inside = [&](const Box3D& s) {
        return count(s.x_min, s.x_max, x0) * count(s.y_min, s.y_max, y0) * count(s.z_min, s.z_max, z0);
    };
    const Box3D inter{std::max(a.x_min, b.x_min), std::min(a.x_max, b.x_max), std::max(a.y_min, b.y_min),
                      std::min(a.y_max, b.y_max), std::max(a.z_min, b.z_min), std::min(a.z_max, b.z_max)};
    const bool overlap = inter.x_min < inter.x_max && inter.y_min < inter.y_max && inter.z_min < inter.z_max;
    const double in_a = inside(a), in_b = inside(b);
    // Brute-force the intersection by scanning its voxels along every axis.
    double both = 0.0;
    if (overlap) {
        const auto nx = static_cast<std::int64_t>(std::ceil((x1 - x0) / h));
        const auto ny = static_cast<std::int64_t>(std::ceil((y1 - y0) / h));
        const auto nz = static_cast<std::int64_t>(std::ceil((z1 - z0) / h));
        auto in = [](double c, double lo, double hi) { return c >= lo && c < hi; };
        std::int64_t cx = 0, cy = 0, cz = 0;
        for (std::int64_t i = 0; i < nx; ++i) {
            const double c = x0 + (i + 0.5) * h;
            cx += in(c, a.x_min, a.x_max) && in(c, b.x_min, b.x_max);
        }
        for (std::int64_t i = 0; i < ny; ++i) {
            const double c = y0 + (i + 0.5) * h;
            cy += in(c, a.y_min, a.y_max) && in(c, b.y_min, b.y_max);
        }
        for (std::int64_t i = 0; i < nz; ++i) {
            const double c = z0 + (i + 0.5) * h;
            cz += in(c, a.z_min, a.z_max) && in(c, b.z_min, b.z_max);
        }
        both = double(cx) * double(cy) * double(cz);
    }
    const double uni = in_a + in_b - both;
    return uni > 0.0 ? both / uni : 0.0;
}

struct McEstimate {
    double iou = 0.0;
    double sigma = 0.0;
};

/// Monte-Carlo IOU: uniform samples in the bounding box of a and b.
/// sigma is the delta-method standard error of the ratio estimator.
inline McEstimate monte_carlo_iou(const Box3D& a, const Box3D& b, std::size_t n, std::mt19937_64& rng) {
    const double x0 = std::min(a.x_min, b.x_min), x1 = std::max(a.x_max, b.x_max);
    const double y0 = std::min(a.y_min, b.y_min), y1 = std::max(a.y_max, b.y_max);
    const double z0 = std::min(a.z_min, b.z_min), z1 = std::max(a.z_max, b.z_max);
    std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1), uz(z0, z1);
    auto in = [](const Box3D& s, double x, double y, double z) {
        return x >= s.x_min && x < s.x_max && y >= s.y_min && y < s.y_max && z >= s.z_min && z < s.z_max;
    };
    std::size_t n_int = 0, n_uni = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = ux(rng), y = uy(rng), z = uz(rng);
        const bool ia = in(a, x, y, z), ib = in(b, x, y, z);
        n_int += ia && ib;
        n_uni += ia || ib;
    }
    McEstimate e;
    if (n_uni == 0) return e;
    e.iou = double(n_int) / double(n_uni);
    // Conditional on the union count the intersection count is binomial.
    e.sigma = std::sqrt(std::max(e.iou * (1.0 - e.iou), 1.0 / double(n_uni)) / double(n_uni));
    return e;
}

/// Exhaustive scan of every pixel: valid depths of mask pixels whose centre
/// lies in the box.
inline std::vector<float> scan_support(const DepthMap& depth, const Mask2D& mask, const Box2D& box) {
    const auto dense = rasterize(mask);
    std::vector<float> out;
    for (int r = 0; r < depth.height; ++r)
        for (int c = 0; c < depth.width; ++c) {
            const double cx = c + 0.5, cy = r + 0.5;
            if (cx < box.x_min || cx > box.x_max || cy < box.y_min || cy > box.y_max) continue;
            const std::size_t i = std::size_t(r) * depth.width + c;
            if (dense[i] && depth.values[i] > 0.0f) out.push_back(depth.values[i]);
        }
    return out;
}

/// Percentile with linear interpolation on the fully sorted sample.
inline double sorted_percentile(std::vector<float> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p / 100.0 * double(v.size() - 1);
    const auto lo = std::size_t(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return double(v[lo]) + (double(v[hi]) - double(v[lo])) * (pos - double(lo));
}

}  // namespace testing
