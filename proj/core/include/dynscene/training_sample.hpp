// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/camera.hpp"
#include "dynscene/image.hpp"
#include "dynscene/outpaint_bridge.hpp"
#include "dynscene/point_cloud.hpp"

#include <vector>

namespace dynscene {

struct TrainingVideo {
    std::vector<RgbImage> rgb;
    std::vector<DepthMap> depth;
};

struct TrainingSample {
    // Conditioning exactly as at inference time, rendered at the source pose.
    RayConditioningBundle bundle;
    // Ground truth the outpainter should reproduce.
    std::vector<RgbImage> target;
    // Per-frame indices (into the row-major pixel order of the source frame)
    // of the points that survived frustum filtering.
    std::vector<std::vector<std::uint32_t>> surviving;
    double closer_offset = 0.0;
    double unseen_fraction = 0.0;
};

struct TrainingSampleOptions {
    int splat_radius = 1;
    IndexParams index_params;
};

// Backprojects the video, moves the camera forward by closer_offset along its
// optical axis, keeps only points inside the moved camera's frustum, then
// renders the survivors back at the original pose. closer_offset must be
// >= 0 (0 keeps every point). Throws ValidationError when a frame loses all
// of its points.
TrainingSample prepare_training_sample(const TrainingVideo& video, const Camera& camera,
                                       double closer_offset,
                                       const TrainingSampleOptions& options = {});

// True when the world point lies in front of the camera and projects inside
// the image.
bool in_frustum(const Camera& camera, const Eigen::Vector3d& world_point);

struct FractionSearch {
    double offset = 0.0;
    double achieved_fraction = 0.0;
    int evaluations = 0;
};

// Bisects closer_offset so the mean unseen fraction lands within tolerance of
// target. Throws ValidationError when the target cannot be reached.
FractionSearch search_offset_for_fraction(const TrainingVideo& video, const Camera& camera,
                                          double target_fraction, double tolerance = 0.02,
                                          const TrainingSampleOptions& options = {});

} // namespace dynscene
