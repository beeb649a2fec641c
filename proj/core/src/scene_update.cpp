// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/scene_update.hpp"

#include "dynscene/errors.hpp"
#include "dynscene/parallel.hpp"
#include "dynscene/rasterizer.hpp"
#include "dynscene/ray_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dynscene {
namespace {

struct Candidate {
    std::int64_t d2;
    std::size_t index;
    bool operator<(const Candidate& o) const {
        return d2 != o.d2 ? d2 < o.d2 : index < o.index;
    }
};

// Sorts, truncates to k and blends 1/d weights in ascending order.
double blend(std::vector<Candidate>& c, const DepthMap& depth, int k) {
    std::sort(c.begin(), c.end());
    if (c.empty()) return 0.0;
    if (c.front().d2 == 0) return depth[c.front().index];
    const std::size_t n = std::min<std::size_t>(c.size(), static_cast<std::size_t>(k));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 1.0 / std::sqrt(static_cast<double>(c[i].d2));
        num += w * depth[c[i].index];
        den += w;
    }
    return num / den;
}

// True once no candidate at squared distance >= bound2 can enter the top k.
bool settled(std::vector<Candidate>& c, int k, std::int64_t bound2) {
    if (c.size() < static_cast<std::size_t>(k)) return false;
    std::nth_element(c.begin(), c.begin() + (k - 1), c.end());
    return c[static_cast<std::size_t>(k - 1)].d2 < bound2;
}

void check_shapes(const DepthMap& depth, const Mask& mask, const char* what) {
    if (!mask.same_shape(depth)) {
        throw ValidationError(std::string(what) + ": depth and mask sizes differ");
    }
}

} // namespace

AlignedDepth align_depth(const DepthMap& estimated, const DepthMap& ray_depth,
                         const Mask& observed) {
    if (!estimated.same_shape(ray_depth) || !estimated.same_shape(observed)) {
        throw ValidationError("align_depth: maps have different sizes");
    }
    std::size_t n = 0;
    double mean_e = 0.0, mean_r = 0.0;
    for (std::size_t i = 0; i < estimated.size(); ++i) {
        if (!observed[i]) continue;
        ++n;
        mean_e += estimated[i];
        mean_r += ray_depth[i];
    }
    if (n == 0) throw ValidationError("align_depth: no observed pixels to fit against");
    mean_e /= static_cast<double>(n);
    mean_r /= static_cast<double>(n);
    double var = 0.0, cov = 0.0, before = 0.0;
    for (std::size_t i = 0; i < estimated.size(); ++i) {
        if (!observed[i]) continue;
        const double de = estimated[i] - mean_e;
        var += de * de;
        cov += de * (ray_depth[i] - mean_r);
        const double r = estimated[i] - ray_depth[i];
        before += r * r;
    }

    AffineDepthFit fit;
    fit.n_samples = n;
    fit.rms_residual_before = std::sqrt(before / static_cast<double>(n));
    if (var / static_cast<double>(n) < kMinAlignmentVariance || cov <= 0.0) {
        fit.shift_only = true;
        fit.scale = 1.0;
        fit.shift = mean_r - mean_e;
    } else {
        fit.scale = cov / var;
        fit.shift = mean_r - fit.scale * mean_e;
    }

    AlignedDepth out{DepthMap(estimated.width(), estimated.height()), fit};
    double after = 0.0;
    for (std::size_t i = 0; i < estimated.size(); ++i) {
        out.depth[i] = fit.scale * estimated[i] + fit.shift;
        if (observed[i]) {
            const double r = out.depth[i] - ray_depth[i];
            after += r * r;
        }
    }
    out.fit.rms_residual_after = std::sqrt(after / static_cast<double>(n));
    return out;
}

LiftedContent lift_new_content(const std::vector<RgbImage>& video,
                               const std::vector<DepthMap>& depths,
                               const std::vector<Mask>& fg_masks,
                               const std::vector<Mask>& observed, const Camera& camera,
                               PoseIndex pose, InitDiagnostics* diagnostics) {
    const std::size_t n = video.size();
    if (n == 0 || depths.size() != n || fg_masks.size() != n || observed.size() != n) {
        throw ValidationError("lift_new_content: need the same non-zero number of frames, depths, "
                              "masks and observed masks");
    }
    const int w = camera.width();
    const int h = camera.height();
    std::vector<LayerFrame> fg_frames(n), bg_frames(n);
    std::vector<Mask> effective(n);
    Mask any_unseen(w, h);
    for (std::size_t t = 0; t < n; ++t) {
        if (!video[t].same_shape(w, h) || !depths[t].same_shape(w, h) ||
            !fg_masks[t].same_shape(w, h) || !observed[t].same_shape(w, h)) {
            throw ValidationError("lift_new_content: frame " + std::to_string(t) +
                                  " does not match the camera size");
        }
        fg_frames[t] = {RgbImage(w, h), Mask(w, h)};
        bg_frames[t] = {RgbImage(w, h), Mask(w, h)};
        effective[t] = Mask(w, h);
        for (std::size_t i = 0; i < video[t].size(); ++i) {
            const bool fg = fg_masks[t][i] != 0;
            const bool seen = observed[t][i] != 0;
            // Observed pixels are treated like foreground so the background
            // average only draws on newly synthesized pixels.
            effective[t][i] = (fg || seen) ? 1 : 0;
            if (seen) continue;
            any_unseen[i] = 1;
            auto& layer = fg ? fg_frames[t] : bg_frames[t];
            layer.rgb[i] = video[t][i];
            layer.present[i] = 1;
        }
    }

    LiftedContent out;
    out.foreground = init_foreground(fg_frames, depths, camera, pose, diagnostics);
    const BackgroundDepth bg_depth = background_depth(depths, effective);
    BackgroundInit bg = init_background(bg_frames, bg_depth, camera, pose, diagnostics);
    out.background = std::move(bg.layer);
    out.occluded = Mask(w, h);
    for (std::size_t i = 0; i < out.occluded.size(); ++i) {
        out.occluded[i] = (any_unseen[i] && bg.occluded[i]) ? 1 : 0;
    }
    return out;
}

SceneState merge_update(const SceneState& scene, const LiftedContent& content,
                        const Camera& pose, const std::string& prompt) {
    const int n = scene.frame_count();
    if (static_cast<int>(content.foreground.size()) != n ||
        (content.background.frame_count() != n && !content.background.empty())) {
        throw ValidationError("merge_update: new content has a different frame count");
    }
    const auto tag = static_cast<PoseIndex>(scene.poses.size());
    SceneState next = scene;
    for (int t = 0; t < n; ++t) {
        PointSet fg = content.foreground[t];
        std::fill(fg.source_pose.begin(), fg.source_pose.end(), tag);
        next.cloud.foreground[t].append(fg);
    }
    if (!content.background.empty()) {
        BackgroundLayer bg = content.background;
        std::fill(bg.source_pose.begin(), bg.source_pose.end(), tag);
        next.cloud.background.append(bg);
    }
    next.poses.push_back(pose);
    next.occluded_background.push_back(content.occluded.empty() ? Mask(pose.width(), pose.height())
                                                                : content.occluded);
    next.prompts.push_back(prompt);
    return next;
}

double interpolate_depth(const DepthMap& depth, const Mask& valid, int x, int y, int neighbours) {
    check_shapes(depth, valid, "interpolate_depth");
    if (neighbours < 1) throw ValidationError("interpolate_depth: neighbours must be >= 1");
    const int w = depth.width();
    const int h = depth.height();
    const int max_ring = std::max({x, y, w - 1 - x, h - 1 - y, 0});
    std::vector<Candidate> found;
    for (int r = 0; r <= max_ring; ++r) {
        for (int yy = y - r; yy <= y + r; ++yy) {
            if (yy < 0 || yy >= h) continue;
            const bool edge_row = yy == y - r || yy == y + r;
            const int step = edge_row ? 1 : 2 * r;
            for (int xx = x - r; xx <= x + r; xx += std::max(step, 1)) {
                if (xx < 0 || xx >= w || !valid(xx, yy)) continue;
                const std::int64_t dx = xx - x, dy = yy - y;
                found.push_back({dx * dx + dy * dy, depth.index(xx, yy)});
            }
        }
        // Pixels on ring r + 1 lie at least r + 1 away.
        const std::int64_t next = r + 1;
        if (settled(found, neighbours, next * next)) break;
    }
    return blend(found, depth, neighbours);
}

DepthMap interpolate_depth_map(const DepthMap& depth, const Mask& valid, const Mask& targets,
                               int neighbours) {
    check_shapes(depth, valid, "interpolate_depth_map");
    check_shapes(depth, targets, "interpolate_depth_map");
    if (neighbours < 1) throw ValidationError("interpolate_depth_map: neighbours must be >= 1");
    constexpr int kCell = 16;
    const int w = depth.width();
    const int h = depth.height();
    const int cw = (w + kCell - 1) / kCell;
    const int ch = (h + kCell - 1) / kCell;
    std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(cw) * ch);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (valid(x, y)) {
                cells[static_cast<std::size_t>(y / kCell) * cw + x / kCell].push_back(
                    depth.index(x, y));
            }
        }
    }
    DepthMap out = depth;
    parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t row) {
        const int y = static_cast<int>(row);
        std::vector<Candidate> found;
        for (int x = 0; x < w; ++x) {
            if (!targets(x, y)) continue;
            found.clear();
            const int cx = x / kCell, cy = y / kCell;
            const int max_ring = std::max({cx, cy, cw - 1 - cx, ch - 1 - cy});
            for (int r = 0; r <= max_ring; ++r) {
                for (int gy = cy - r; gy <= cy + r; ++gy) {
                    if (gy < 0 || gy >= ch) continue;
                    const bool edge_row = gy == cy - r || gy == cy + r;
                    const int step = edge_row ? 1 : std::max(2 * r, 1);
                    for (int gx = cx - r; gx <= cx + r; gx += step) {
                        if (gx < 0 || gx >= cw) continue;
                        for (std::size_t idx : cells[static_cast<std::size_t>(gy) * cw + gx]) {
                            const std::int64_t dx = static_cast<std::int64_t>(idx % w) - x;
                            const std::int64_t dy = static_cast<std::int64_t>(idx / w) - y;
                            found.push_back({dx * dx + dy * dy, idx});
                        }
                    }
                }
                // Cells on ring r + 1 are at least r * kCell + 1 pixels away.
                const std::int64_t next = static_cast<std::int64_t>(r) * kCell + 1;
                if (settled(found, neighbours, next * next)) break;
            }
            out(x, y) = blend(found, depth, neighbours);
        }
    });
    return out;
}

SceneState complete_background(const SceneState& scene, Outpainter& outpainter,
                               std::size_t pose_index, int splat_radius,
                               const IndexParams& index_params) {
    if (pose_index >= scene.poses.size() || pose_index >= scene.occluded_background.size()) {
        throw ValidationError("complete_background: no pose " + std::to_string(pose_index));
    }
    const Mask& occluded = scene.occluded_background[pose_index];
    if (count_set(occluded) == 0) return scene;
    const BackgroundLayer& bg = scene.cloud.background;
    if (bg.empty()) {
        throw ValidationError("complete_background: the scene has no background points to "
                              "condition on");
    }
    const Camera& camera = scene.poses[pose_index];
    if (!occluded.same_shape(camera.width(), camera.height())) {
        throw ValidationError("complete_background: occlusion mask does not match the camera");
    }
    const int w = camera.width();
    const int h = camera.height();
    const int n = scene.frame_count();

    auto raster = rasterize_background(bg, camera, splat_radius);
    const PointIndex index(bg.positions, index_params);
    RayConditioningBundle bundle;
    bundle.camera = camera;
    bundle.scene_prompt = pose_index < scene.prompts.size() ? scene.prompts[pose_index] : "";
    bundle.frames.resize(static_cast<std::size_t>(n));
    parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t t) {
        const RasterOutput& r = raster[t];
        ConditioningFrame f;
        f.observed = Mask(w, h);
        f.partial_rgb = RgbImage(w, h);
        f.ray_depth = DepthMap(w, h);
        f.invalid_color = Mask(w, h);
        f.foreground = Mask(w, h);
        for (std::size_t i = 0; i < f.observed.size(); ++i) {
            if (!r.observed[i] || occluded[i]) continue;
            f.observed[i] = 1;
            f.partial_rgb[i] = r.partial_rgb[i];
            f.ray_depth[i] = r.ray_depth[i];
            f.invalid_color[i] = r.invalid_color[i];
        }
        RayDistanceMap dist = ray_distance_map(camera, invert(f.observed), index);
        f.ray_distance = std::move(dist.values);
        f.unseen = std::move(dist.computed);
        bundle.frames[t] = std::move(f);
    });

    const OutpaintResult result = outpainter.outpaint(bundle);
    if (static_cast<int>(result.frames.size()) != n) {
        throw DimensionMismatch("background completion: outpainter returned " +
                                std::to_string(result.frames.size()) + " frames, expected " +
                                std::to_string(n));
    }
    for (const auto& frame : result.frames) {
        if (!frame.same_shape(w, h)) {
            throw DimensionMismatch("background completion: outpainted frame has the wrong size");
        }
    }

    const DepthMap filled =
        interpolate_depth_map(bundle.frames[0].ray_depth, bundle.frames[0].observed, occluded);
    double fallback = 0.0;
    if (count_set(bundle.frames[0].observed) == 0) {
        std::vector<double> z;
        for (const auto& p : bg.positions) {
            const Eigen::Vector3d c = camera.world_to_camera().apply(p.cast<double>());
            if (c.z() > 0.0) z.push_back(c.z());
        }
        if (z.empty()) {
            throw ValidationError("background completion: no background point lies in front of "
                                  "pose " + std::to_string(pose_index));
        }
        std::nth_element(z.begin(), z.begin() + z.size() / 2, z.end());
        fallback = z[z.size() / 2];
    }

    SceneState next = scene;
    const auto tag = static_cast<PoseIndex>(pose_index);
    std::vector<Rgb> colors(static_cast<std::size_t>(n));
    const std::vector<std::uint8_t> valid(static_cast<std::size_t>(n), 1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!occluded(x, y)) continue;
            const double d = fallback > 0.0 ? fallback : filled(x, y);
            if (!(d > 0.0) || !std::isfinite(d)) continue;
            for (int t = 0; t < n; ++t) colors[t] = result.frames[t](x, y);
            next.cloud.background.push_back(backproject(camera, x, y, d).cast<float>(), colors,
                                            valid, tag);
        }
    }
    next.occluded_background[pose_index] = Mask(w, h);
    return next;
}

} // namespace dynscene
