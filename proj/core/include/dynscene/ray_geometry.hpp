// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/camera.hpp"
#include "dynscene/image.hpp"
#include "dynscene/point_cloud.hpp"
#include "dynscene/point_index.hpp"

#include <Eigen/Core>

#include <memory>
#include <span>
#include <vector>

namespace dynscene {

// Distance between the line through the origin along unit `ray` and `point`:
// sqrt(max(0, |p|^2 - (r.p)^2)). Throws ValidationError if |ray| differs from
// 1 by more than 1e-9.
double dist_r2p(const Eigen::Vector3d& ray, const Eigen::Vector3d& point);

struct RayDistanceMap {
    DepthMap values;      // world units, 0 where not computed
    Mask computed;
};

// For every pixel with unseen == 1, the minimum ray-to-point distance over all
// points held by `indices`, measured from the camera center. Throws
// ValidationError when no index is given.
RayDistanceMap ray_distance_map(const Camera& camera, const Mask& unseen,
                                std::span<const PointIndex* const> indices);

RayDistanceMap ray_distance_map(const Camera& camera, const Mask& unseen, const PointIndex& index);

// Per-timestamp indices over foreground(t) union background, with the
// background index built once and shared.
class SceneIndex {
public:
    SceneIndex(const DynamicPointCloud& cloud, const IndexParams& params = {});

    int frame_count() const { return static_cast<int>(foreground_.size()); }
    // Non-null indices for timestamp t; empty if the cloud has no points at t.
    std::vector<const PointIndex*> at(int t) const;

private:
    std::shared_ptr<const PointIndex> background_;
    std::vector<std::shared_ptr<const PointIndex>> foreground_;
};

// Distance maps for every timestamp. unseen[t] selects the pixels to compute.
std::vector<RayDistanceMap> ray_distance_video(const DynamicPointCloud& cloud, const Camera& camera,
                                               const std::vector<Mask>& unseen,
                                               const IndexParams& params = {});

} // namespace dynscene
