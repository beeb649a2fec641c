// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/ray_geometry.hpp"

#include "dynscene/errors.hpp"
#include "dynscene/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dynscene {

double dist_r2p(const Eigen::Vector3d& ray, const Eigen::Vector3d& point) {
    const double norm = ray.norm();
    if (!(std::abs(norm - 1.0) <= 1e-9)) {
        throw ValidationError("dist_r2p: ray must be unit length, |r| = " + std::to_string(norm));
    }
    const double along = ray.dot(point);
    return std::sqrt(std::max(0.0, point.squaredNorm() - along * along));
}

RayDistanceMap ray_distance_map(const Camera& camera, const Mask& unseen,
                                std::span<const PointIndex* const> indices) {
    if (indices.empty()) {
        throw ValidationError("ray_distance_map: the point cloud is empty, distance is undefined");
    }
    if (!unseen.same_shape(camera.width(), camera.height())) {
        throw ValidationError("ray_distance_map: unseen mask does not match the camera size");
    }
    const int w = camera.width();
    const int h = camera.height();
    RayDistanceMap out{DepthMap(w, h), Mask(w, h)};
    const Eigen::Vector3d origin = camera.center();
    parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t row) {
        const int y = static_cast<int>(row);
        // The previous pixel's closest point bounds this pixel's search. The
        // bound is a real point's distance, so the minimum is unchanged.
        bool have_hint = false;
        Position hint = Position::Zero();
        for (int x = 0; x < w; ++x) {
            if (!unseen(x, y)) continue;
            const Eigen::Vector3d dir = camera.ray_direction(x, y);
            double best = std::numeric_limits<double>::infinity();
            if (have_hint) best = point_line_squared(origin, dir, hint);
            for (const PointIndex* index : indices) {
                const auto hit = index->closest_to_line(origin, dir, best);
                if (hit.found) {
                    best = hit.squared_distance;
                    hint = hit.point;
                    have_hint = true;
                }
            }
            out.values(x, y) = std::sqrt(best);
            out.computed(x, y) = 1;
        }
    });
    return out;
}

RayDistanceMap ray_distance_map(const Camera& camera, const Mask& unseen, const PointIndex& index) {
    const PointIndex* ptr = &index;
    return ray_distance_map(camera, unseen, std::span<const PointIndex* const>(&ptr, 1));
}

SceneIndex::SceneIndex(const DynamicPointCloud& cloud, const IndexParams& params) {
    cloud.check_consistent();
    if (!cloud.background.empty()) {
        background_ = std::make_shared<PointIndex>(cloud.background.positions, params);
    }
    foreground_.resize(cloud.foreground.size());
    parallel_for(0, cloud.foreground.size(), [&](std::size_t t) {
        if (!cloud.foreground[t].empty()) {
            foreground_[t] = std::make_shared<PointIndex>(cloud.foreground[t].positions, params);
        }
    });
}

std::vector<const PointIndex*> SceneIndex::at(int t) const {
    std::vector<const PointIndex*> out;
    if (foreground_.at(static_cast<std::size_t>(t))) out.push_back(foreground_[t].get());
    if (background_) out.push_back(background_.get());
    return out;
}

std::vector<RayDistanceMap> ray_distance_video(const DynamicPointCloud& cloud, const Camera& camera,
                                               const std::vector<Mask>& unseen,
                                               const IndexParams& params) {
    if (static_cast<int>(unseen.size()) != cloud.frame_count()) {
        throw ValidationError("ray_distance_video: need one unseen mask per timestamp");
    }
    const SceneIndex index(cloud, params);
    std::vector<RayDistanceMap> maps;
    maps.reserve(unseen.size());
    for (int t = 0; t < cloud.frame_count(); ++t) {
        const auto indices = index.at(t);
        if (indices.empty()) {
            if (count_set(unseen[t]) == 0) {
                maps.push_back({DepthMap(camera.width(), camera.height()),
                                Mask(camera.width(), camera.height())});
                continue;
            }
            throw ValidationError("ray_distance_video: no points at timestamp " +
                                  std::to_string(t));
        }
        maps.push_back(ray_distance_map(camera, unseen[t], indices));
    }
    return maps;
}

} // namespace dynscene
