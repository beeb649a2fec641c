// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/camera.hpp"
#include "dynscene/image.hpp"
#include "dynscene/point_cloud.hpp"

#include <span>
#include <vector>

namespace dynscene {

// Fill color for background points whose color is invalid at a timestamp.
inline constexpr Rgb kInvalidColorFill{255, 0, 255};

// Depth values closer than this are treated as equal; the lower point index wins.
inline constexpr double kDepthTieTolerance = 1e-12;

struct RasterOutput {
    RgbImage partial_rgb;      // zero where unobserved
    DepthMap ray_depth;        // 0 where unobserved, > 0 elsewhere
    Mask observed;
    Mask invalid_color;        // winner is a background point with no color at t
    Mask foreground;           // winner is a foreground point
    int timestamp = 0;
};

// Square-splat z-buffer rasterization. Points are indexed by their position
// in the concatenation of `layers`; a point covers every pixel within
// splat_radius (Chebyshev) of its rounded projection. Points behind the
// camera or projecting outside the image are discarded.
RasterOutput rasterize(std::span<const PointLayerView> layers, const Camera& camera,
                       int splat_radius, int timestamp = 0);

RasterOutput rasterize(const PointSet& points, const Camera& camera, int splat_radius,
                       int timestamp = 0);

// Frame t draws foreground(t) and the background with colors[t].
std::vector<RasterOutput> rasterize_video(const DynamicPointCloud& cloud, const Camera& camera,
                                          int splat_radius);

// Background layer only, same conventions as rasterize_video.
std::vector<RasterOutput> rasterize_background(const BackgroundLayer& background,
                                               const Camera& camera, int splat_radius);

double observed_fraction(const RasterOutput& output);

} // namespace dynscene
