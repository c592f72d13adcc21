#pragma once

#include "poselift/ingest.hpp"

namespace poselift {

/// Axis-aligned 3D box in camera coordinates, meters.
struct Box3D {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;
    double z_min = 0.0;
    double z_max = 0.0;

    double volume() const { return (x_max - x_min) * (y_max - y_min) * (z_max - z_min); }
    Box3D translated(double dx, double dy, double dz) const {
        return {x_min + dx, x_max + dx, y_min + dy, y_max + dy, z_min + dz, z_max + dz};
    }

    bool operator==(const Box3D&) const = default;
};

/// Throws ValidationError unless every extent is finite and strictly positive.
void validate(const Box3D& box);

struct DepthRange {
    double z_min = 0.0;
    double z_max = 0.0;
};

struct LiftOptions {
    /// Minimum z extent of a lifted box, meters.
    double min_thickness = 0.2;
    /// Robust extrema: the p-th and (100-p)-th percentiles of the sampled
    /// depths. 0 gives the absolute min/max.
    double depth_percentile = 1.0;
};

/// Near/far depth over valid pixels of `mask` whose centres lie in `box`.
/// Percentiles interpolate linearly between order statistics.
/// Throws EmptySupport when no valid pixel is found.
DepthRange depth_extrema(const DepthMap& depth, const Mask2D& mask, const Box2D& box,
                         double percentile = 0.0);

/// 3D box of a person: z extent from depth_extrema, x/y extent from the 2D
/// box corners back-projected at the mid depth. Thin boxes are inflated
/// symmetrically to `min_thickness`.
Box3D lift_box(const Box2D& box, const DepthMap& depth, const Mask2D& mask,
               const CameraModel& cam, const LiftOptions& opts = {});

/// Intersection-over-union of two axis-aligned boxes by volume.
double iou3d(const Box3D& a, const Box3D& b);
double iou2d(const Box2D& a, const Box2D& b);

}  // namespace poselift
