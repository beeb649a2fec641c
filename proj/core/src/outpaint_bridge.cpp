// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/outpaint_bridge.hpp"

#include "dynscene/errors.hpp"
#include "dynscene/io/bundle_io.hpp"
#include "dynscene/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

namespace dynscene {

RayConditioningBundle build_bundle(const DynamicPointCloud& cloud, const Camera& camera,
                                   const std::string& scene_prompt, int splat_radius,
                                   const IndexParams& index_params) {
    auto raster = rasterize_video(cloud, camera, splat_radius);
    std::vector<Mask> unseen;
    unseen.reserve(raster.size());
    for (const auto& r : raster) unseen.push_back(invert(r.observed));
    auto distance = ray_distance_video(cloud, camera, unseen, index_params);

    RayConditioningBundle bundle;
    bundle.scene_prompt = scene_prompt;
    bundle.camera = camera;
    for (std::size_t t = 0; t < raster.size(); ++t) {
        auto& r = raster[t];
        bundle.frames.push_back({std::move(r.partial_rgb), std::move(r.observed),
                                 std::move(r.ray_depth), std::move(distance[t].values),
                                 std::move(distance[t].computed), std::move(r.invalid_color),
                                 std::move(r.foreground)});
    }
    return bundle;
}

std::vector<BundleViolation> validate_bundle(const RayConditioningBundle& bundle) {
    std::vector<BundleViolation> out;
    const int w = bundle.width();
    const int h = bundle.height();
    if (bundle.frames.empty()) {
        out.push_back({"no_frames", -1, -1, -1, 0, "bundle has no frames"});
        return out;
    }
    for (int t = 0; t < bundle.frame_count(); ++t) {
        const auto& f = bundle.frames[t];
        if (!f.partial_rgb.same_shape(w, h) || !f.observed.same_shape(w, h) ||
            !f.ray_depth.same_shape(w, h) || !f.ray_distance.same_shape(w, h) ||
            !f.unseen.same_shape(w, h) || !f.invalid_color.same_shape(w, h) ||
            !f.foreground.same_shape(w, h)) {
            std::ostringstream msg;
            msg << "frame " << t << ": maps do not all match " << w << "x" << h;
            out.push_back({"dimension_mismatch", t, -1, -1, 0, msg.str()});
            continue;
        }
        std::size_t overlap = 0, gap = 0, bad_depth = 0, bad_dist = 0, stray_invalid = 0;
        int depth_x = -1, depth_y = -1, dist_x = -1, dist_y = -1;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const bool obs = f.observed(x, y) != 0;
                const bool uns = f.unseen(x, y) != 0;
                if (obs && uns) ++overlap;
                if (!obs && !uns) ++gap;
                if (obs) {
                    const double d = f.ray_depth(x, y);
                    if (!(std::isfinite(d) && d > 0.0) && bad_depth++ == 0) {
                        depth_x = x;
                        depth_y = y;
                    }
                } else if (f.invalid_color(x, y)) {
                    ++stray_invalid;
                }
                if (uns) {
                    const double d = f.ray_distance(x, y);
                    if (!(std::isfinite(d) && d >= 0.0) && bad_dist++ == 0) {
                        dist_x = x;
                        dist_y = y;
                    }
                }
            }
        }
        auto add = [&](const char* code, std::size_t count, int x, int y, const std::string& what) {
            std::ostringstream msg;
            msg << "frame " << t << ": " << what;
            if (x >= 0) msg << " (first at pixel " << x << "," << y << ")";
            out.push_back({code, t, x, y, count, msg.str()});
        };
        if (overlap) add("mask_overlap", overlap, -1, -1,
                         "mask overlap at " + std::to_string(overlap) + " pixels");
        if (gap) add("mask_gap", gap, -1, -1,
                     "neither observed nor unseen at " + std::to_string(gap) + " pixels");
        if (bad_depth) add("ray_depth_invalid", bad_depth, depth_x, depth_y,
                           std::to_string(bad_depth) + " observed pixels with non-positive or "
                                                       "non-finite ray depth");
        if (bad_dist) add("ray_distance_invalid", bad_dist, dist_x, dist_y,
                          std::to_string(bad_dist) + " unseen pixels with negative or "
                                                     "non-finite ray distance");
        if (stray_invalid) add("invalid_color_unobserved", stray_invalid, -1, -1,
                               "invalid-color flag set on " + std::to_string(stray_invalid) +
                                   " unobserved pixels");
    }
    return out;
}

std::optional<StubMode> parse_stub_mode(const std::string& name) {
    if (name == "constant") return StubMode::constant;
    if (name == "border_replicate") return StubMode::border_replicate;
    if (name == "nearest_observed") return StubMode::nearest_observed;
    return std::nullopt;
}

std::string to_string(StubMode mode) {
    switch (mode) {
    case StubMode::constant: return "constant";
    case StubMode::border_replicate: return "border_replicate";
    case StubMode::nearest_observed: return "nearest_observed";
    }
    return "unknown";
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Source pixel (row-major index) for every pixel; observed pixels map to themselves.
std::vector<std::size_t> border_sources(const Mask& observed) {
    const int w = observed.width();
    const int h = observed.height();
    std::vector<std::size_t> src(observed.size(), kNone);
    std::vector<int> rows_with_data;
    for (int y = 0; y < h; ++y) {
        int prev = -1;
        std::vector<int> left(static_cast<std::size_t>(w), -1);
        for (int x = 0; x < w; ++x) {
            if (observed(x, y)) prev = x;
            left[x] = prev;
        }
        if (prev < 0) continue;
        rows_with_data.push_back(y);
        int next = -1;
        for (int x = w - 1; x >= 0; --x) {
            if (observed(x, y)) next = x;
            const int l = left[x];
            int pick;
            if (l < 0) pick = next;
            else if (next < 0) pick = l;
            else pick = (x - l <= next - x) ? l : next;  // ties go left
            src[observed.index(x, y)] = observed.index(pick, y);
        }
    }
    // Rows without observed pixels borrow the nearest such row (ties go up).
    for (int y = 0; y < h; ++y) {
        if (src[observed.index(0, y)] != kNone) continue;
        const auto it = std::lower_bound(rows_with_data.begin(), rows_with_data.end(), y);
        int pick;
        if (it == rows_with_data.end()) pick = rows_with_data.back();
        else if (it == rows_with_data.begin()) pick = *it;
        else pick = (y - *(it - 1) <= *it - y) ? *(it - 1) : *it;
        for (int x = 0; x < w; ++x) src[observed.index(x, y)] = src[observed.index(x, pick)];
    }
    return src;
}

// Exact Euclidean nearest observed pixel, ties broken by lowest row-major index.
std::vector<std::size_t> nearest_sources(const Mask& observed) {
    const int w = observed.width();
    const int h = observed.height();
    constexpr int kFar = std::numeric_limits<int>::max();
    // Per column: nearest observed row for every y (ties go up).
    std::vector<int> col_row(observed.size(), -1);
    parallel_for(0, static_cast<std::size_t>(w), [&](std::size_t cx) {
        const int x = static_cast<int>(cx);
        int prev = -1;
        std::vector<int> up(static_cast<std::size_t>(h), -1);
        for (int y = 0; y < h; ++y) {
            if (observed(x, y)) prev = y;
            up[y] = prev;
        }
        int next = -1;
        for (int y = h - 1; y >= 0; --y) {
            if (observed(x, y)) next = y;
            const int u = up[y];
            int pick;
            if (u < 0) pick = next;
            else if (next < 0) pick = u;
            else pick = (y - u <= next - y) ? u : next;
            col_row[observed.index(x, y)] = pick;
        }
    });
    std::vector<std::size_t> src(observed.size(), kNone);
    parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t cy) {
        const int y = static_cast<int>(cy);
        for (int x = 0; x < w; ++x) {
            const std::size_t self = observed.index(x, y);
            if (observed[self]) {
                src[self] = self;
                continue;
            }
            long long best_d2 = kFar;
            std::size_t best = kNone;
            auto consider = [&](int cx) {
                const int row = col_row[observed.index(cx, y)];
                if (row < 0) return;
                const long long dx = cx - x;
                const long long dy = row - y;
                const long long d2 = dx * dx + dy * dy;
                const std::size_t idx = observed.index(cx, row);
                if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
                    best_d2 = d2;
                    best = idx;
                }
            };
            for (int dx = 0; dx < w; ++dx) {
                if (static_cast<long long>(dx) * dx > best_d2) break;
                if (x - dx >= 0) consider(x - dx);
                if (dx > 0 && x + dx < w) consider(x + dx);
            }
            src[self] = best;
        }
    });
    return src;
}

} // namespace

OutpaintResult fill_stub(const RayConditioningBundle& bundle, StubMode mode) {
    OutpaintResult result;
    result.provenance = "stub:" + to_string(mode);
    result.frames.resize(bundle.frames.size());
    result.foreground.resize(bundle.frames.size());
    for (std::size_t t = 0; t < bundle.frames.size(); ++t) {
        const auto& f = bundle.frames[t];
        RgbImage out = f.partial_rgb;
        Mask fg(f.observed.width(), f.observed.height());
        const std::size_t observed = count_set(f.observed);
        StubMode effective = mode;
        if (observed == 0 && mode != StubMode::constant) {
            effective = StubMode::constant;
            result.fallback_frames.push_back(static_cast<int>(t));
        }
        std::vector<std::size_t> src;
        if (effective == StubMode::border_replicate) src = border_sources(f.observed);
        if (effective == StubMode::nearest_observed) src = nearest_sources(f.observed);
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (f.observed[i]) {
                fg[i] = f.foreground[i];
                continue;
            }
            if (effective == StubMode::constant) {
                out[i] = kMidGray;
            } else {
                out[i] = f.partial_rgb[src[i]];
                fg[i] = f.foreground[src[i]];
            }
        }
        result.frames[t] = std::move(out);
        result.foreground[t] = std::move(fg);
    }
    return result;
}

void check_result(const RayConditioningBundle& bundle, const OutpaintResult& result,
                  int drift_tolerance) {
    const int w = bundle.width();
    const int h = bundle.height();
    if (result.frames.size() != bundle.frames.size()) {
        throw DimensionMismatch("outpaint result has " + std::to_string(result.frames.size()) +
                                " frames, expected " + std::to_string(bundle.frames.size()));
    }
    for (std::size_t t = 0; t < result.frames.size(); ++t) {
        if (!result.frames[t].same_shape(w, h)) {
            throw DimensionMismatch("outpaint result frame " + std::to_string(t) + " is " +
                                    std::to_string(result.frames[t].width()) + "x" +
                                    std::to_string(result.frames[t].height()) + ", expected " +
                                    std::to_string(w) + "x" + std::to_string(h));
        }
        if (!result.depths.empty() &&
            (result.depths.size() != result.frames.size() || !result.depths[t].same_shape(w, h))) {
            throw DimensionMismatch("outpaint result depth maps do not match the bundle");
        }
        if (!result.foreground.empty() && (result.foreground.size() != result.frames.size() ||
                                           !result.foreground[t].same_shape(w, h))) {
            throw DimensionMismatch("outpaint result foreground masks do not match the bundle");
        }
    }
    if (!result.preserves_observed) return;
    int worst = -1;
    std::size_t worst_t = 0;
    int worst_x = 0, worst_y = 0;
    std::size_t offending = 0;
    for (std::size_t t = 0; t < result.frames.size(); ++t) {
        const auto& f = bundle.frames[t];
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!f.observed(x, y) || f.invalid_color(x, y)) continue;
                const Rgb a = f.partial_rgb(x, y);
                const Rgb b = result.frames[t](x, y);
                const int drift = std::max({std::abs(a.r - b.r), std::abs(a.g - b.g),
                                            std::abs(a.b - b.b)});
                if (drift > drift_tolerance) ++offending;
                if (drift > worst) {
                    worst = drift;
                    worst_t = t;
                    worst_x = x;
                    worst_y = y;
                }
            }
        }
    }
    if (worst > drift_tolerance) {
        std::ostringstream msg;
        msg << "outpaint result changed " << offending << " observed pixels beyond " << drift_tolerance
            << "/255; worst " << worst << "/255 at frame " << worst_t << " pixel (" << worst_x
            << "," << worst_y << ")";
        throw ObservedDrift(msg.str());
    }
}

OutpaintResult external_exchange(const RayConditioningBundle& bundle,
                                 const std::filesystem::path& exchange_dir,
                                 const ExchangeOptions& options) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(exchange_dir, ec);
    if (ec) throw IoError("cannot create exchange directory " + exchange_dir.string());
    const fs::path bundle_dir = exchange_dir / "bundle";
    const fs::path result_dir = exchange_dir / "result";
    fs::remove_all(result_dir, ec);
    fs::remove_all(bundle_dir, ec);
    io::write_bundle(bundle_dir, bundle);

    const auto deadline = std::chrono::steady_clock::now() + options.timeout;
    const fs::path done = result_dir / "manifest.json";
    while (!fs::exists(done)) {
        if (std::chrono::steady_clock::now() >= deadline) {
            throw ExchangeTimeout("no outpaint result in " + result_dir.string() + " after " +
                                  std::to_string(options.timeout.count()) + " ms");
        }
        std::this_thread::sleep_for(options.poll_interval);
    }
    OutpaintResult result =
        io::read_result(result_dir, bundle.frame_count(), bundle.width(), bundle.height());
    check_result(bundle, result, options.drift_tolerance);
    result.provenance = "external:" + result.provenance;
    return result;
}

} // namespace dynscene
