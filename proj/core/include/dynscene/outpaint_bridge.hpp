// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/camera.hpp"
#include "dynscene/image.hpp"
#include "dynscene/point_cloud.hpp"
#include "dynscene/point_index.hpp"
#include "dynscene/rasterizer.hpp"
#include "dynscene/ray_geometry.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dynscene {

struct ConditioningFrame {
    RgbImage partial_rgb;
    Mask observed;
    DepthMap ray_depth;       // defined where observed
    DepthMap ray_distance;    // defined where unseen
    Mask unseen;              // pixels where ray_distance was computed
    Mask invalid_color;
    Mask foreground;          // rasterized winner was a foreground point
};

// What an outpainter receives for one pose.
struct RayConditioningBundle {
    std::vector<ConditioningFrame> frames;
    std::string scene_prompt;
    Camera camera;

    int frame_count() const { return static_cast<int>(frames.size()); }
    int width() const { return camera.width(); }
    int height() const { return camera.height(); }
};

// Rasterizes the cloud at `camera` and computes distance maps on the unseen pixels.
RayConditioningBundle build_bundle(const DynamicPointCloud& cloud, const Camera& camera,
                                   const std::string& scene_prompt, int splat_radius,
                                   const IndexParams& index_params = {});

struct BundleViolation {
    std::string code;   // machine-readable kind, e.g. "mask_overlap"
    int frame = -1;
    int x = -1;
    int y = -1;
    std::size_t count = 0;
    std::string message;
};

// Every violated bundle invariant. Never throws.
std::vector<BundleViolation> validate_bundle(const RayConditioningBundle& bundle);

struct OutpaintResult {
    std::vector<RgbImage> frames;
    std::string provenance;
    // Optional side channels. Empty when the outpainter did not provide them.
    std::vector<DepthMap> depths;
    std::vector<Mask> foreground;
    // Frames where a stub fell back to constant fill.
    std::vector<int> fallback_frames;
    bool preserves_observed = true;
};

enum class StubMode { constant, border_replicate, nearest_observed };

std::optional<StubMode> parse_stub_mode(const std::string& name);
std::string to_string(StubMode mode);

// Deterministic fill: observed pixels are copied, unseen pixels filled per mode.
// The returned foreground masks carry over the source pixel's layer.
OutpaintResult fill_stub(const RayConditioningBundle& bundle, StubMode mode);

struct ExchangeOptions {
    std::chrono::milliseconds timeout{std::chrono::seconds(600)};
    std::chrono::milliseconds poll_interval{50};
    // Per-channel tolerance on observed pixels, in 8-bit levels.
    int drift_tolerance = 2;
};

// File-protocol session with an external outpainter through exchange_dir.
// Throws ExchangeTimeout, MalformedResult, DimensionMismatch or ObservedDrift.
OutpaintResult external_exchange(const RayConditioningBundle& bundle,
                                 const std::filesystem::path& exchange_dir,
                                 const ExchangeOptions& options = {});

// Checks a result against its bundle. Throws the same errors as external_exchange.
void check_result(const RayConditioningBundle& bundle, const OutpaintResult& result,
                  int drift_tolerance);

class Outpainter {
public:
    virtual ~Outpainter() = default;
    virtual OutpaintResult outpaint(const RayConditioningBundle& bundle) = 0;
    virtual std::string name() const = 0;
};

class StubOutpainter final : public Outpainter {
public:
    explicit StubOutpainter(StubMode mode) : mode_(mode) {}
    OutpaintResult outpaint(const RayConditioningBundle& bundle) override {
        return fill_stub(bundle, mode_);
    }
    std::string name() const override { return "stub:" + to_string(mode_); }

private:
    StubMode mode_;
};

class ExternalOutpainter final : public Outpainter {
public:
    ExternalOutpainter(std::filesystem::path exchange_dir, ExchangeOptions options)
        : dir_(std::move(exchange_dir)), options_(options) {}
    OutpaintResult outpaint(const RayConditioningBundle& bundle) override {
        return external_exchange(bundle, dir_, options_);
    }
    std::string name() const override { return "external:" + dir_.string(); }

private:
    std::filesystem::path dir_;
    ExchangeOptions options_;
};

} // namespace dynscene
