// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/rasterizer.hpp"

#include "dynscene/errors.hpp"
#include "dynscene/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace dynscene {
namespace {

struct Splat {
    std::int32_t x = 0;
    std::int32_t y = 0;
    double depth = 0.0;
    bool visible = false;
};

constexpr std::uint64_t kNoWinner = std::numeric_limits<std::uint64_t>::max();

} // namespace

RasterOutput rasterize(std::span<const PointLayerView> layers, const Camera& camera,
                       int splat_radius, int timestamp) {
    if (splat_radius < 0) throw ValidationError("rasterize: splat radius must be >= 0");
    const int w = camera.width();
    const int h = camera.height();
    const auto& k = camera.intrinsics();
    const Eigen::Matrix3d rot = camera.world_to_camera().rotation;
    const Eigen::Vector3d trans = camera.world_to_camera().translation;

    std::vector<std::size_t> offsets{0};
    for (const auto& layer : layers) {
        if (layer.colors.size() != layer.size() ||
            (!layer.color_valid.empty() && layer.color_valid.size() != layer.size())) {
            throw ValidationError("rasterize: layer attributes do not match its point count");
        }
        offsets.push_back(offsets.back() + layer.size());
    }
    const std::size_t total = offsets.back();

    std::vector<Splat> splats(total);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto positions = layers[l].positions;
        const std::size_t base = offsets[l];
        parallel_chunks(0, positions.size(), [&](std::size_t lo, std::size_t hi, unsigned) {
            for (std::size_t i = lo; i < hi; ++i) {
                const Eigen::Vector3d p = rot * positions[i].cast<double>() + trans;
                Splat& s = splats[base + i];
                if (!(p.z() > 0.0) || !p.allFinite()) continue;
                const double fx = k.fx * p.x() / p.z() + k.cx;
                const double fy = k.fy * p.y() / p.z() + k.cy;
                if (!std::isfinite(fx) || !std::isfinite(fy)) continue;
                // Reject before the integer conversion to avoid overflow.
                if (fx < -0.5 || fy < -0.5 || fx >= w - 0.5 || fy >= h - 0.5) continue;
                const int px = pixel_index(fx);
                const int py = pixel_index(fy);
                if (px < 0 || py < 0 || px >= w || py >= h) continue;
                s = {px, py, p.z(), true};
            }
        });
    }

    std::vector<double> best_depth(static_cast<std::size_t>(w) * h,
                                   std::numeric_limits<double>::infinity());
    std::vector<std::uint64_t> winner(best_depth.size(), kNoWinner);
    const int r = splat_radius;
    // Each band owns a disjoint set of rows and visits points in index order,
    // so the result does not depend on the number of bands.
    parallel_chunks(0, static_cast<std::size_t>(h), [&](std::size_t lo, std::size_t hi, unsigned) {
        const int y0 = static_cast<int>(lo);
        const int y1 = static_cast<int>(hi);
        for (std::size_t idx = 0; idx < total; ++idx) {
            const Splat& s = splats[idx];
            if (!s.visible || s.y + r < y0 || s.y - r >= y1) continue;
            const int ya = std::max(y0, s.y - r);
            const int yb = std::min(y1 - 1, s.y + r);
            const int xa = std::max(0, s.x - r);
            const int xb = std::min(w - 1, s.x + r);
            for (int y = ya; y <= yb; ++y) {
                const std::size_t row = static_cast<std::size_t>(y) * w;
                for (int x = xa; x <= xb; ++x) {
                    const std::size_t pix = row + x;
                    if (s.depth < best_depth[pix] - kDepthTieTolerance) {
                        best_depth[pix] = s.depth;
                        winner[pix] = idx;
                    }
                }
            }
        }
    });

    RasterOutput out{RgbImage(w, h), DepthMap(w, h), Mask(w, h), Mask(w, h), Mask(w, h),
                     timestamp};
    parallel_for(0, best_depth.size(), [&](std::size_t pix) {
        const std::uint64_t idx = winner[pix];
        if (idx == kNoWinner) return;
        const auto l = static_cast<std::size_t>(
            std::upper_bound(offsets.begin(), offsets.end(), idx) - offsets.begin() - 1);
        const std::size_t local = idx - offsets[l];
        const auto& layer = layers[l];
        const bool color_ok = layer.color_valid.empty() || layer.color_valid[local] != 0;
        out.observed[pix] = 1;
        out.ray_depth[pix] = best_depth[pix];
        out.partial_rgb[pix] = color_ok ? layer.colors[local] : kInvalidColorFill;
        out.invalid_color[pix] = color_ok ? 0 : 1;
        out.foreground[pix] = layer.foreground ? 1 : 0;
    });
    return out;
}

RasterOutput rasterize(const PointSet& points, const Camera& camera, int splat_radius,
                       int timestamp) {
    const PointLayerView layer{points.positions, points.colors, {}, true};
    return rasterize(std::span<const PointLayerView>(&layer, 1), camera, splat_radius, timestamp);
}

std::vector<RasterOutput> rasterize_video(const DynamicPointCloud& cloud, const Camera& camera,
                                          int splat_radius) {
    cloud.check_consistent();
    std::vector<RasterOutput> frames;
    frames.reserve(static_cast<std::size_t>(cloud.frame_count()));
    for (int t = 0; t < cloud.frame_count(); ++t) {
        const auto layers = layers_at(cloud, t);
        frames.push_back(rasterize(layers, camera, splat_radius, t));
    }
    return frames;
}

std::vector<RasterOutput> rasterize_background(const BackgroundLayer& background,
                                               const Camera& camera, int splat_radius) {
    std::vector<RasterOutput> frames;
    for (int t = 0; t < background.frame_count(); ++t) {
        const PointLayerView layer{background.positions, background.colors[t], background.valid[t],
                                   false};
        frames.push_back(
            rasterize(std::span<const PointLayerView>(&layer, 1), camera, splat_radius, t));
    }
    return frames;
}

double observed_fraction(const RasterOutput& output) {
    if (output.observed.empty()) return 0.0;
    return static_cast<double>(count_set(output.observed)) /
           static_cast<double>(output.observed.size());
}

} // namespace dynscene
