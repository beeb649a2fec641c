// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/camera.hpp"
#include "dynscene/image.hpp"
#include "dynscene/point_cloud.hpp"
#include "dynscene/scene_state.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace dynscene {

// One frame of a fixed-pose video with its depth and foreground mask.
struct FrameBundle {
    RgbImage rgb;
    DepthMap depth;
    Mask fg_mask;
    int timestamp = 0;
};

struct InitInput {
    std::vector<FrameBundle> frames;
    Camera camera;
    std::string scene_prompt;
};

// Pixels of one frame that belong to a layer. rgb is zero where present == 0.
struct LayerFrame {
    RgbImage rgb;
    Mask present;
};

struct SplitFrames {
    std::vector<LayerFrame> foreground;
    std::vector<LayerFrame> background;
};

struct SkippedPixel {
    int timestamp = 0;
    int x = 0;
    int y = 0;
    double depth = 0.0;
};

// Pixels dropped because their depth was non-positive or non-finite.
struct InitDiagnostics {
    std::vector<SkippedPixel> skipped_foreground;
    std::vector<SkippedPixel> skipped_background;

    std::size_t skipped_count() const {
        return skipped_foreground.size() + skipped_background.size();
    }
};

struct BackgroundDepth {
    DepthMap depth;
    // 1 where the pixel is foreground in every frame.
    Mask always_occluded;
};

struct BackgroundInit {
    BackgroundLayer layer;
    Mask occluded;
};

// Exact per-pixel partition of each frame by its foreground mask.
SplitFrames split_foreground(const std::vector<FrameBundle>& frames);

// One point per foreground pixel per timestamp, tagged with `pose`.
std::vector<PointSet> init_foreground(const std::vector<LayerFrame>& fg_frames,
                                      const std::vector<DepthMap>& depths, const Camera& camera,
                                      PoseIndex pose = 0, InitDiagnostics* diagnostics = nullptr);

// Masked temporal mean of depth over background frames. Where a pixel is
// never background the unmasked temporal mean is used and the pixel flagged.
BackgroundDepth background_depth(const std::vector<DepthMap>& depths,
                                 const std::vector<Mask>& fg_masks);

// One static point per pixel that is background in at least one frame.
BackgroundInit init_background(const std::vector<LayerFrame>& bg_frames,
                               const BackgroundDepth& bg_depth, const Camera& camera,
                               PoseIndex pose = 0, InitDiagnostics* diagnostics = nullptr);

DynamicPointCloud merge_init(std::vector<PointSet> foreground, BackgroundLayer background);

// Full initialization: split, lift both layers, merge, and seed the scene
// state with the init pose.
SceneState initialize_scene(const InitInput& input, InitDiagnostics* diagnostics = nullptr);

} // namespace dynscene
