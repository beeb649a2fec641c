// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/scene_init.hpp"

#include "dynscene/errors.hpp"
#include "dynscene/parallel.hpp"

#include <cmath>
#include <string>

namespace dynscene {
namespace {

bool usable_depth(double d) { return d > 0.0 && std::isfinite(d); }

void check_binary(const Mask& mask, std::size_t t) {
    for (auto v : mask.pixels()) {
        if (v > 1) {
            throw ValidationError("foreground mask of frame " + std::to_string(t) +
                                  " is not binary (value " + std::to_string(v) + ")");
        }
    }
}

Position to_position(const Eigen::Vector3d& p) { return p.cast<float>(); }

} // namespace

SplitFrames split_foreground(const std::vector<FrameBundle>& frames) {
    SplitFrames split;
    split.foreground.resize(frames.size());
    split.background.resize(frames.size());
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const auto& frame = frames[t];
        if (!frame.fg_mask.same_shape(frame.rgb)) {
            throw ValidationError("frame " + std::to_string(t) + ": mask and rgb sizes differ");
        }
        check_binary(frame.fg_mask, t);
        const int w = frame.rgb.width();
        const int h = frame.rgb.height();
        LayerFrame fg{RgbImage(w, h), Mask(w, h)};
        LayerFrame bg{RgbImage(w, h), Mask(w, h)};
        for (std::size_t i = 0; i < frame.rgb.size(); ++i) {
            auto& dst = frame.fg_mask[i] ? fg : bg;
            dst.rgb[i] = frame.rgb[i];
            dst.present[i] = 1;
        }
        split.foreground[t] = std::move(fg);
        split.background[t] = std::move(bg);
    }
    return split;
}

std::vector<PointSet> init_foreground(const std::vector<LayerFrame>& fg_frames,
                                      const std::vector<DepthMap>& depths, const Camera& camera,
                                      PoseIndex pose, InitDiagnostics* diagnostics) {
    if (fg_frames.size() != depths.size()) {
        throw ValidationError("init_foreground: " + std::to_string(fg_frames.size()) +
                              " frames but " + std::to_string(depths.size()) + " depth maps");
    }
    const std::size_t n = fg_frames.size();
    std::vector<PointSet> sets(n);
    std::vector<std::vector<SkippedPixel>> skipped(n);
    parallel_for(0, n, [&](std::size_t t) {
        const auto& layer = fg_frames[t];
        const auto& depth = depths[t];
        if (!layer.present.same_shape(depth) || !depth.same_shape(camera.width(), camera.height())) {
            throw ValidationError("init_foreground: frame " + std::to_string(t) +
                                  " does not match the camera size");
        }
        auto& out = sets[t];
        for (int y = 0; y < depth.height(); ++y) {
            for (int x = 0; x < depth.width(); ++x) {
                if (!layer.present(x, y)) continue;
                const double d = depth(x, y);
                if (!usable_depth(d)) {
                    skipped[t].push_back({static_cast<int>(t), x, y, d});
                    continue;
                }
                out.push_back(to_position(backproject(camera, x, y, d)), layer.rgb(x, y), pose);
            }
        }
    });
    if (diagnostics) {
        for (auto& s : skipped) {
            diagnostics->skipped_foreground.insert(diagnostics->skipped_foreground.end(), s.begin(),
                                                   s.end());
        }
    }
    return sets;
}

BackgroundDepth background_depth(const std::vector<DepthMap>& depths,
                                 const std::vector<Mask>& fg_masks) {
    if (depths.empty() || depths.size() != fg_masks.size()) {
        throw ValidationError("background_depth: need matching, non-empty depth and mask lists");
    }
    const int w = depths.front().width();
    const int h = depths.front().height();
    for (std::size_t t = 0; t < depths.size(); ++t) {
        if (!depths[t].same_shape(w, h) || !fg_masks[t].same_shape(w, h)) {
            throw ValidationError("background_depth: frame " + std::to_string(t) +
                                  " has mismatched dimensions");
        }
    }
    BackgroundDepth out{DepthMap(w, h), Mask(w, h)};
    const std::size_t frames = depths.size();
    parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < w; ++x) {
            double weighted = 0.0;
            double weight = 0.0;
            double all = 0.0;
            for (std::size_t t = 0; t < frames; ++t) {
                const double d = depths[t](x, y);
                const double keep = 1.0 - static_cast<double>(fg_masks[t](x, y) != 0);
                weighted += d * keep;
                weight += keep;
                all += d;
            }
            if (weight > 0.0) {
                out.depth(x, y) = weighted / weight;
            } else {
                out.depth(x, y) = all / static_cast<double>(frames);
                out.always_occluded(x, y) = 1;
            }
        }
    });
    return out;
}

BackgroundInit init_background(const std::vector<LayerFrame>& bg_frames,
                               const BackgroundDepth& bg_depth, const Camera& camera,
                               PoseIndex pose, InitDiagnostics* diagnostics) {
    const int n = static_cast<int>(bg_frames.size());
    const int w = bg_depth.depth.width();
    const int h = bg_depth.depth.height();
    if (!bg_depth.depth.same_shape(camera.width(), camera.height())) {
        throw ValidationError("init_background: depth map does not match the camera size");
    }
    for (int t = 0; t < n; ++t) {
        if (!bg_frames[t].present.same_shape(w, h)) {
            throw ValidationError("init_background: frame " + std::to_string(t) +
                                  " has mismatched dimensions");
        }
    }
    BackgroundInit out{BackgroundLayer(n), bg_depth.always_occluded};
    std::vector<Rgb> colors(static_cast<std::size_t>(n));
    std::vector<std::uint8_t> valid(static_cast<std::size_t>(n));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (bg_depth.always_occluded(x, y)) continue;
            bool seen = false;
            for (int t = 0; t < n; ++t) {
                const bool present = bg_frames[t].present(x, y) != 0;
                colors[t] = present ? bg_frames[t].rgb(x, y) : Rgb{};
                valid[t] = present ? 1 : 0;
                seen = seen || present;
            }
            if (!seen) continue;
            const double d = bg_depth.depth(x, y);
            if (!usable_depth(d)) {
                if (diagnostics) diagnostics->skipped_background.push_back({-1, x, y, d});
                continue;
            }
            out.layer.push_back(to_position(backproject(camera, x, y, d)), colors, valid, pose);
        }
    }
    return out;
}

DynamicPointCloud merge_init(std::vector<PointSet> foreground, BackgroundLayer background) {
    if (static_cast<int>(foreground.size()) != background.frame_count()) {
        throw ValidationError("merge_init: foreground has " + std::to_string(foreground.size()) +
                              " timestamps, background " +
                              std::to_string(background.frame_count()));
    }
    DynamicPointCloud cloud;
    cloud.foreground = std::move(foreground);
    cloud.background = std::move(background);
    cloud.check_consistent();
    return cloud;
}

SceneState initialize_scene(const InitInput& input, InitDiagnostics* diagnostics) {
    if (input.frames.empty()) throw ValidationError("initialize_scene: no frames");
    const int w = input.camera.width();
    const int h = input.camera.height();
    std::vector<DepthMap> depths;
    std::vector<Mask> masks;
    for (std::size_t t = 0; t < input.frames.size(); ++t) {
        const auto& f = input.frames[t];
        if (!f.rgb.same_shape(w, h) || !f.depth.same_shape(w, h) || !f.fg_mask.same_shape(w, h)) {
            throw ValidationError("initialize_scene: frame " + std::to_string(t) +
                                  " does not match the camera size " + std::to_string(w) + "x" +
                                  std::to_string(h));
        }
        depths.push_back(f.depth);
        masks.push_back(f.fg_mask);
    }
    const SplitFrames split = split_foreground(input.frames);
    auto fg = init_foreground(split.foreground, depths, input.camera, 0, diagnostics);
    const BackgroundDepth bg_depth = background_depth(depths, masks);
    BackgroundInit bg = init_background(split.background, bg_depth, input.camera, 0, diagnostics);

    SceneState scene;
    scene.cloud = merge_init(std::move(fg), std::move(bg.layer));
    scene.poses.push_back(input.camera);
    scene.occluded_background.push_back(std::move(bg.occluded));
    scene.prompts.push_back(input.scene_prompt);
    return scene;
}

} // namespace dynscene
