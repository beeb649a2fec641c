// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/camera.hpp"
#include "dynscene/image.hpp"
#include "dynscene/outpaint_bridge.hpp"
#include "dynscene/point_cloud.hpp"
#include "dynscene/scene_init.hpp"
#include "dynscene/scene_state.hpp"

#include <vector>

namespace dynscene {

struct AffineDepthFit {
    double scale = 1.0;
    double shift = 0.0;
    double rms_residual_before = 0.0;
    double rms_residual_after = 0.0;
    std::size_t n_samples = 0;
    bool shift_only = false;
};

inline constexpr double kMinAlignmentVariance = 1e-12;

struct AlignedDepth {
    DepthMap depth;
    AffineDepthFit fit;
};

// Least-squares scale/shift taking `estimated` onto `ray_depth` over the
// observed pixels, applied to the whole frame. Falls back to shift-only when
// the estimated variance is below kMinAlignmentVariance or the scale is not
// positive. Throws ValidationError when nothing is observed.
AlignedDepth align_depth(const DepthMap& estimated, const DepthMap& ray_depth,
                         const Mask& observed);

struct LiftedContent {
    std::vector<PointSet> foreground;
    BackgroundLayer background;
    // Unseen pixels that were foreground every time they were unseen.
    Mask occluded;
};

// Runs scene initialization restricted to unobserved pixels.
LiftedContent lift_new_content(const std::vector<RgbImage>& video,
                               const std::vector<DepthMap>& depths,
                               const std::vector<Mask>& fg_masks,
                               const std::vector<Mask>& observed, const Camera& camera,
                               PoseIndex pose, InitDiagnostics* diagnostics = nullptr);

// Appends the new content (tagged with the new pose index) and the pose.
SceneState merge_update(const SceneState& scene, const LiftedContent& content,
                        const Camera& pose, const std::string& prompt = {});

// Inverse-distance weighted depth from the `neighbours` nearest valid pixels
// (Euclidean pixel distance, ties by row-major index). Returns 0 if there are
// no valid pixels.
double interpolate_depth(const DepthMap& depth, const Mask& valid, int x, int y,
                         int neighbours = 8);

// interpolate_depth at every target pixel, using a bucketed search. Other
// pixels keep their input value.
DepthMap interpolate_depth_map(const DepthMap& depth, const Mask& valid, const Mask& targets,
                               int neighbours = 8);

// Fills the background never observed at pose `pose_index` by outpainting the
// background video there, then lifts and merges the filled pixels. Existing
// points are untouched. Bridge errors propagate.
SceneState complete_background(const SceneState& scene, Outpainter& outpainter,
                               std::size_t pose_index, int splat_radius = 0,
                               const IndexParams& index_params = {});

} // namespace dynscene
