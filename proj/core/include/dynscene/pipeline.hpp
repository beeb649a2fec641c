// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/camera.hpp"
#include "dynscene/outpaint_bridge.hpp"
#include "dynscene/point_index.hpp"
#include "dynscene/scene_init.hpp"
#include "dynscene/scene_state.hpp"
#include "dynscene/scene_update.hpp"
#include "dynscene/trajectory.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dynscene {

struct OutpaintConfig {
    enum class Mode { stub, external };
    Mode mode = Mode::stub;
    StubMode stub = StubMode::nearest_observed;
    std::filesystem::path exchange_dir = "exchange";
    double timeout_s = 600.0;
    int drift_tolerance = 2;
};

// All paths are relative to `workspace`.
struct PipelineConfig {
    std::filesystem::path workspace = ".";
    std::filesystem::path input_dir = "input";
    std::filesystem::path camera_file = "input/camera.json";
    // 0 means "take from the input files".
    int frames = 0;
    int width = 0;
    int height = 0;
    std::string init_prompt;
    std::vector<TrajectorySpec> trajectory;
    std::vector<std::string> prompts;  // one per trajectory segment
    OutpaintConfig outpaint;
    int splat_radius = 1;
    IndexParams index;
    std::filesystem::path output_dir = "scene";
    std::filesystem::path artifacts_dir = "steps";
    std::uint64_t seed = 0;
    bool complete_background = true;
    double overlap_low = 0.3;
    double overlap_high = 0.9;

    std::filesystem::path resolve(const std::filesystem::path& p) const;
};

// Parses the JSON config. Unknown keys are rejected. Throws ValidationError.
PipelineConfig parse_config(const std::string& json_text,
                            const std::filesystem::path& workspace);
PipelineConfig load_config(const std::filesystem::path& config_file,
                           const std::filesystem::path& workspace);
std::string config_to_json(const PipelineConfig& config);

// Input video layout inside a directory: frame_{t:03}_rgb.png,
// frame_{t:03}_depth.pfm, frame_{t:03}_mask.png.
void write_input_video(const std::filesystem::path& dir, const InitInput& input);
// Reads every frame; the frame count is the number of frame_*_rgb.png files.
// Throws ValidationError naming the offending file.
InitInput read_input_video(const std::filesystem::path& dir, const Camera& camera);

std::unique_ptr<Outpainter> make_outpainter(const PipelineConfig& config);

// Stand-in for a monocular depth model on an outpainted frame: ray depth on
// observed pixels, inverse-distance interpolation elsewhere, `fallback`
// when nothing is observed.
DepthMap estimate_depth_stub(const ConditioningFrame& frame, double fallback);

struct InitReport {
    int frames = 0;
    std::size_t foreground_points = 0;
    std::size_t background_points = 0;
    std::size_t skipped_pixels = 0;
    std::size_t occluded_pixels = 0;
    std::size_t completed_points = 0;
};

struct StepReport {
    std::size_t step_index = 0;
    std::size_t points_before = 0;
    std::size_t points_after = 0;
    std::vector<double> observed_fraction;
    std::vector<AffineDepthFit> fits;
    std::vector<int> fallback_frames;
    bool overlap_warning = false;
    std::string provenance;
};

struct CoverageRow {
    std::size_t pose = 0;
    int timestamp = 0;
    double observed_fraction = 0.0;
};

struct DataprepReport {
    double closer_offset = 0.0;
    double unseen_fraction = 0.0;
    int frames = 0;
};

InitReport cmd_init(const PipelineConfig& config);
// Fails atomically: on any error the persisted state is untouched.
StepReport cmd_step(const PipelineConfig& config, const Camera& pose, const std::string& prompt);
// init followed by one step per trajectory pose.
std::vector<StepReport> cmd_run(const PipelineConfig& config);
// Poses of every trajectory segment, chained from `start`.
std::vector<std::pair<Camera, std::string>> trajectory_poses(const PipelineConfig& config,
                                                             const Camera& start);
// Renders every (camera, timestamp) pair to out_dir/render_{p:03}_{t:03}.png
// and writes out_dir/coverage.csv.
std::vector<CoverageRow> cmd_render(const PipelineConfig& config,
                                    const std::vector<Camera>& cameras,
                                    const std::filesystem::path& out_dir);
// Writes a training sample (bundle layout plus target_{t:03}_rgb.png).
DataprepReport cmd_dataprep(const PipelineConfig& config, std::optional<double> closer_offset,
                            std::optional<double> target_fraction,
                            const std::filesystem::path& out_dir);

} // namespace dynscene
