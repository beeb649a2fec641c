// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/training_sample.hpp"

#include "dynscene/errors.hpp"
#include "dynscene/parallel.hpp"
#include "dynscene/rasterizer.hpp"
#include "dynscene/ray_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace dynscene {
namespace {

struct FrameSurvivors {
    PointSet points;
    std::vector<std::uint32_t> pixels;
};

void check_video(const TrainingVideo& video, const Camera& camera) {
    if (video.rgb.empty() || video.rgb.size() != video.depth.size()) {
        throw ValidationError("training video needs the same non-zero number of rgb and depth frames");
    }
    for (std::size_t t = 0; t < video.rgb.size(); ++t) {
        if (!video.rgb[t].same_shape(camera.width(), camera.height()) ||
            !video.depth[t].same_shape(camera.width(), camera.height())) {
            throw ValidationError("training video frame " + std::to_string(t) +
                                  " does not match the camera size");
        }
    }
}

Camera moved_camera(const Camera& camera, double offset) {
    if (!(offset >= 0.0) || !std::isfinite(offset)) {
        throw ValidationError("closer_offset must be a finite value >= 0, got " +
                              std::to_string(offset));
    }
    RigidTransform forward;
    forward.translation = Eigen::Vector3d(0.0, 0.0, offset);
    return camera.with_pose(camera.pose() * forward);
}

FrameSurvivors survivors(const RgbImage& rgb, const DepthMap& depth, const Camera& camera,
                         const Camera& moved) {
    FrameSurvivors out;
    for (int y = 0; y < depth.height(); ++y) {
        for (int x = 0; x < depth.width(); ++x) {
            const double d = depth(x, y);
            if (!(d > 0.0) || !std::isfinite(d)) continue;
            const Eigen::Vector3d p = backproject(camera, x, y, d);
            if (!in_frustum(moved, p)) continue;
            out.points.push_back(p.cast<float>(), rgb(x, y), 0);
            out.pixels.push_back(static_cast<std::uint32_t>(depth.index(x, y)));
        }
    }
    return out;
}

// Survivors and their rendering at the source pose for every frame.
void filter_and_render(const TrainingVideo& video, const Camera& camera, double offset,
                       int splat_radius, std::vector<FrameSurvivors>& kept,
                       std::vector<RasterOutput>& raster) {
    const Camera moved = moved_camera(camera, offset);
    const std::size_t n = video.rgb.size();
    kept.assign(n, {});
    raster.assign(n, {});
    parallel_for(0, n, [&](std::size_t t) {
        kept[t] = survivors(video.rgb[t], video.depth[t], camera, moved);
        raster[t] = rasterize(kept[t].points, camera, splat_radius, static_cast<int>(t));
    });
    for (std::size_t t = 0; t < n; ++t) {
        if (kept[t].points.empty()) {
            throw ValidationError("closer_offset " + std::to_string(offset) +
                                  " leaves no points in frame " + std::to_string(t));
        }
    }
}

double mean_unseen(const std::vector<RasterOutput>& raster) {
    double sum = 0.0;
    for (const auto& r : raster) sum += 1.0 - observed_fraction(r);
    return sum / static_cast<double>(raster.size());
}

} // namespace

bool in_frustum(const Camera& camera, const Eigen::Vector3d& world_point) {
    const auto proj = project(camera, world_point);
    if (!proj) return false;
    const int px = pixel_index(proj->x);
    const int py = pixel_index(proj->y);
    return px >= 0 && py >= 0 && px < camera.width() && py < camera.height();
}

TrainingSample prepare_training_sample(const TrainingVideo& video, const Camera& camera,
                                       double closer_offset,
                                       const TrainingSampleOptions& options) {
    check_video(video, camera);
    std::vector<FrameSurvivors> kept;
    std::vector<RasterOutput> raster;
    filter_and_render(video, camera, closer_offset, options.splat_radius, kept, raster);

    TrainingSample sample;
    sample.closer_offset = closer_offset;
    sample.target = video.rgb;
    sample.unseen_fraction = mean_unseen(raster);
    sample.bundle.camera = camera;
    sample.bundle.frames.resize(raster.size());
    sample.surviving.resize(raster.size());
    for (std::size_t t = 0; t < raster.size(); ++t) {
        const PointIndex index(kept[t].points.positions, options.index_params);
        RayDistanceMap dist = ray_distance_map(camera, invert(raster[t].observed), index);
        auto& r = raster[t];
        sample.bundle.frames[t] = {std::move(r.partial_rgb), std::move(r.observed),
                                   std::move(r.ray_depth),   std::move(dist.values),
                                   std::move(dist.computed), std::move(r.invalid_color),
                                   std::move(r.foreground)};
        sample.surviving[t] = std::move(kept[t].pixels);
    }
    return sample;
}

FractionSearch search_offset_for_fraction(const TrainingVideo& video, const Camera& camera,
                                          double target_fraction, double tolerance,
                                          const TrainingSampleOptions& options) {
    check_video(video, camera);
    if (!(target_fraction >= 0.0 && target_fraction < 1.0) || !(tolerance > 0.0)) {
        throw ValidationError("target fraction must lie in [0, 1) and tolerance be positive");
    }
    FractionSearch search;
    std::vector<FrameSurvivors> kept;
    std::vector<RasterOutput> raster;
    // An offset that empties a frame counts as fully unseen.
    auto fraction = [&](double offset) -> std::optional<double> {
        ++search.evaluations;
        try {
            filter_and_render(video, camera, offset, options.splat_radius, kept, raster);
        } catch (const ValidationError&) {
            return std::nullopt;
        }
        return mean_unseen(raster);
    };
    auto close_enough = [&](double f) { return std::abs(f - target_fraction) <= tolerance; };

    const auto at_zero = fraction(0.0);
    if (!at_zero) throw ValidationError("training video has a frame without valid depth");
    if (close_enough(*at_zero) || *at_zero > target_fraction) {
        if (!close_enough(*at_zero)) {
            throw ValidationError("unseen fraction is already " + std::to_string(*at_zero) +
                                  " with no offset");
        }
        search.achieved_fraction = *at_zero;
        return search;
    }

    std::vector<double> depths;
    for (const auto& d : video.depth[0].pixels()) {
        if (d > 0.0 && std::isfinite(d)) depths.push_back(d);
    }
    std::nth_element(depths.begin(), depths.begin() + depths.size() / 2, depths.end());
    const double scale = depths[depths.size() / 2];

    double lo = 0.0;
    double hi = 0.01 * scale;
    for (int i = 0;; ++i) {
        const auto f = fraction(hi);
        if (f && close_enough(*f)) {
            search.offset = hi;
            search.achieved_fraction = *f;
            return search;
        }
        if (!f || *f > target_fraction) break;
        if (i > 60) throw ValidationError("target unseen fraction is unreachable");
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        const auto f = fraction(mid);
        if (f && close_enough(*f)) {
            search.offset = mid;
            search.achieved_fraction = *f;
            return search;
        }
        if (!f || *f > target_fraction) {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo <= 1e-12 * scale) break;
    }
    throw ValidationError("could not reach unseen fraction " + std::to_string(target_fraction) +
                          " within " + std::to_string(tolerance));
}

} // namespace dynscene
