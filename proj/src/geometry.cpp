#include "poselift/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "poselift/error.hpp"

namespace poselift {

namespace {

double overlap(double a_min, double a_max, double b_min, double b_max) {
    return std::max(0.0, std::min(a_max, b_max) - std::max(a_min, b_min));
}

// Linear-interpolated quantile of an unsorted sample; q in [0,1]. Reorders `v`.
double quantile(std::vector<float>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
    const double a = v[lo];
    if (frac == 0.0 || lo + 1 >= v.size()) return a;
    const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
    return a + (b - a) * frac;
}

}  // namespace

void validate(const Box3D& b) {
    for (double v : {b.x_min, b.x_max, b.y_min, b.y_max, b.z_min, b.z_max})
        if (!std::isfinite(v)) throw ValidationError("Box3D: non-finite coordinate");
    if (!(b.x_min < b.x_max)) throw ValidationError("Box3D: x_min must be < x_max");
    if (!(b.y_min < b.y_max)) throw ValidationError("Box3D: y_min must be < y_max");
    if (!(b.z_min < b.z_max)) throw ValidationError("Box3D: z_min must be < z_max");
}

DepthRange depth_extrema(const DepthMap& depth, const Mask2D& mask, const Box2D& box,
                         double percentile) {
    if (mask.width != depth.width || mask.height != depth.height)
        throw ValidationError("Mask2D: dimensions differ from the depth map");
    if (!(percentile >= 0.0 && percentile < 50.0))
        throw ValidationError("depth_extrema: percentile must be in [0,50)");
    validate(mask);
    validate(box);

    const PixelRect rect = pixel_rect(box, depth.width, depth.height);
    std::vector<float> samples;
    float lo = 0.0f, hi = 0.0f;
    bool any = false;
    for (const auto& run : mask.runs) {
        // Walk the run one image row at a time, restricted to the box columns.
        std::int64_t idx = run.start;
        const std::int64_t end = run.start + run.length;
        while (idx < end) {
            const int row = static_cast<int>(idx / depth.width);
            const std::int64_t row_base = std::int64_t{row} * depth.width;
            const std::int64_t row_end = std::min(end, row_base + depth.width);
            if (row >= rect.row_begin && row < rect.row_end) {
                const std::int64_t first = std::max(idx, row_base + rect.col_begin);
                const std::int64_t last = std::min(row_end, row_base + rect.col_end);
                for (std::int64_t p = first; p < last; ++p) {
                    const float d = depth.values[static_cast<std::size_t>(p)];
                    if (!DepthMap::valid(d)) continue;
                    if (percentile > 0.0) samples.push_back(d);
                    if (!any) {
                        lo = hi = d;
                        any = true;
                    } else {
                        lo = std::min(lo, d);
                        hi = std::max(hi, d);
                    }
                }
            }
            idx = row_end;
        }
    }
    if (!any) throw EmptySupport("no valid depth inside mask and box");
    if (percentile == 0.0) return {lo, hi};
    const double q = percentile / 100.0;
    const double near = quantile(samples, q);
    const double far = quantile(samples, 1.0 - q);
    return {near, far};
}

Box3D lift_box(const Box2D& box, const DepthMap& depth, const Mask2D& mask,
               const CameraModel& cam, const LiftOptions& opts) {
    validate(cam);
    if (!(opts.min_thickness >= 0.0)) throw ValidationError("LiftOptions.min_thickness: negative");
    const DepthRange range = depth_extrema(depth, mask, box, opts.depth_percentile);
    const double z_mid = 0.5 * (range.z_min + range.z_max);

    const Point3 top_left = back_project(cam, box.x_min, box.y_min, z_mid);
    const Point3 bottom_right = back_project(cam, box.x_max, box.y_max, z_mid);

    double z_near = range.z_min * cam.world_scale;
    double z_far = range.z_max * cam.world_scale;
    // A strictly positive floor keeps constant-depth masks at non-zero volume.
    const double thickness = std::max(opts.min_thickness, 1e-6);
    if (z_far - z_near < thickness) {
        const double centre = z_mid * cam.world_scale;
        z_near = centre - 0.5 * thickness;
        z_far = centre + 0.5 * thickness;
    }
    Box3D out{top_left.x, bottom_right.x, top_left.y, bottom_right.y, z_near, z_far};
    validate(out);
    return out;
}

double iou3d(const Box3D& a, const Box3D& b) {
    const double inter = overlap(a.x_min, a.x_max, b.x_min, b.x_max) *
                         overlap(a.y_min, a.y_max, b.y_min, b.y_max) *
                         overlap(a.z_min, a.z_max, b.z_min, b.z_max);
    if (inter <= 0.0) return 0.0;
    const double uni = a.volume() + b.volume() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double iou2d(const Box2D& a, const Box2D& b) {
    const double inter =
        overlap(a.x_min, a.x_max, b.x_min, b.x_max) * overlap(a.y_min, a.y_max, b.y_min, b.y_max);
    if (inter <= 0.0) return 0.0;
    const double uni = a.area() + b.area() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace poselift
