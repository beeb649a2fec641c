// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/pipeline.hpp"

#include "dynscene/errors.hpp"
#include "dynscene/io/bundle_io.hpp"
#include "dynscene/io/pfm.hpp"
#include "dynscene/io/png.hpp"
#include "dynscene/io/scene_io.hpp"
#include "dynscene/rasterizer.hpp"
#include "dynscene/training_sample.hpp"
#include "io/json_codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace dynscene {

namespace fs = std::filesystem;
using io::Json;

namespace {

std::string numbered(const char* pattern, std::size_t a) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, static_cast<int>(a));
    return buf;
}

std::string numbered(const char* pattern, std::size_t a, std::size_t b) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, static_cast<int>(a), static_cast<int>(b));
    return buf;
}

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw ValidationError("unknown key '" + key + "' in " + where);
    }
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
}

// Typical depth of the scene seen from `camera`, for frames with nothing observed.
double fallback_depth(const DynamicPointCloud& cloud, const Camera& camera) {
    std::vector<double> z, dist;
    const auto& bg = cloud.background.positions;
    for (const auto& p : bg) {
        const Eigen::Vector3d c = camera.world_to_camera().apply(p.cast<double>());
        if (c.z() > 0.0) z.push_back(c.z());
        dist.push_back(c.norm());
    }
    if (!z.empty()) return median(std::move(z));
    if (!dist.empty()) return median(std::move(dist));
    for (const auto& fg : cloud.foreground) {
        for (const auto& p : fg.positions) {
            dist.push_back((p.cast<double>() - camera.center()).norm());
        }
    }
    const double d = median(std::move(dist));
    return d > 0.0 ? d : 1.0;
}

Json fit_json(const AffineDepthFit& f) {
    return Json{{"scale", f.scale},
                {"shift", f.shift},
                {"rms_residual_before", f.rms_residual_before},
                {"rms_residual_after", f.rms_residual_after},
                {"n_samples", f.n_samples},
                {"shift_only", f.shift_only}};
}

} // namespace

fs::path PipelineConfig::resolve(const fs::path& p) const {
    return p.is_absolute() ? p : workspace / p;
}

PipelineConfig parse_config(const std::string& json_text, const fs::path& workspace) {
    const Json j = io::parse_json(json_text, "pipeline config");
    if (!j.is_object()) throw ValidationError("pipeline config must be a JSON object");
    reject_unknown(j,
                   {"input_dir", "camera_file", "frames", "width", "height", "init_prompt",
                    "trajectory", "prompts", "outpaint", "splat_radius", "index", "output_dir",
                    "artifacts_dir", "seed", "complete_background", "overlap_band"},
                   "pipeline config");
    PipelineConfig c;
    c.workspace = workspace;
    try {
        c.input_dir = j.value("input_dir", c.input_dir.string());
        c.camera_file = j.value("camera_file", c.camera_file.string());
        c.frames = j.value("frames", c.frames);
        c.width = j.value("width", c.width);
        c.height = j.value("height", c.height);
        c.init_prompt = j.value("init_prompt", c.init_prompt);
        if (j.contains("trajectory")) {
            for (const auto& s : j.at("trajectory")) c.trajectory.push_back(io::trajectory_from(s));
        }
        if (j.contains("prompts")) c.prompts = j.at("prompts").get<std::vector<std::string>>();
        if (j.contains("outpaint")) {
            const Json& o = j.at("outpaint");
            reject_unknown(o, {"mode", "stub", "exchange_dir", "timeout_s", "drift_tolerance"},
                           "outpaint");
            const std::string mode = o.value("mode", std::string("stub"));
            if (mode == "stub") {
                c.outpaint.mode = OutpaintConfig::Mode::stub;
            } else if (mode == "external") {
                c.outpaint.mode = OutpaintConfig::Mode::external;
            } else {
                throw ValidationError("outpaint.mode must be 'stub' or 'external', got '" + mode + "'");
            }
            const std::string stub = o.value("stub", to_string(c.outpaint.stub));
            const auto parsed = parse_stub_mode(stub);
            if (!parsed) throw ValidationError("unknown stub mode '" + stub + "'");
            c.outpaint.stub = *parsed;
            c.outpaint.exchange_dir = o.value("exchange_dir", c.outpaint.exchange_dir.string());
            c.outpaint.timeout_s = o.value("timeout_s", c.outpaint.timeout_s);
            c.outpaint.drift_tolerance = o.value("drift_tolerance", c.outpaint.drift_tolerance);
        }
        c.splat_radius = j.value("splat_radius", c.splat_radius);
        if (j.contains("index")) {
            const Json& ix = j.at("index");
            reject_unknown(ix, {"leaf_size", "max_depth"}, "index");
            c.index.leaf_size = ix.value("leaf_size", c.index.leaf_size);
            c.index.max_depth = ix.value("max_depth", c.index.max_depth);
        }
        c.output_dir = j.value("output_dir", c.output_dir.string());
        c.artifacts_dir = j.value("artifacts_dir", c.artifacts_dir.string());
        c.seed = j.value("seed", c.seed);
        c.complete_background = j.value("complete_background", c.complete_background);
        if (j.contains("overlap_band")) {
            const auto band = j.at("overlap_band").get<std::vector<double>>();
            if (band.size() != 2) throw ValidationError("overlap_band must hold [low, high]");
            c.overlap_low = band[0];
            c.overlap_high = band[1];
        }
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("pipeline config: ") + e.what());
    }
    if (c.prompts.empty()) c.prompts.assign(c.trajectory.size(), std::string());
    if (c.prompts.size() != c.trajectory.size()) {
        throw ValidationError("pipeline config: " + std::to_string(c.prompts.size()) +
                              " prompts for " + std::to_string(c.trajectory.size()) +
                              " trajectory segments");
    }
    if (c.frames < 0 || c.width < 0 || c.height < 0) {
        throw ValidationError("pipeline config: frames, width and height must be >= 0");
    }
    if (c.splat_radius < 0) throw ValidationError("pipeline config: splat_radius must be >= 0");
    if (c.index.leaf_size < 1 || c.index.max_depth < 0 || c.index.max_depth > 21) {
        throw ValidationError("pipeline config: index.leaf_size must be >= 1 and max_depth in [0, 21]");
    }
    if (!(c.outpaint.timeout_s > 0.0) || c.outpaint.drift_tolerance < 0) {
        throw ValidationError("pipeline config: outpaint timeout must be > 0 and drift tolerance >= 0");
    }
    if (!(c.overlap_low <= c.overlap_high)) {
        throw ValidationError("pipeline config: overlap_band low exceeds high");
    }
    return c;
}

PipelineConfig load_config(const fs::path& config_file, const fs::path& workspace) {
    const fs::path path = config_file.is_absolute() ? config_file : workspace / config_file;
    return parse_config(io::read_text(path), workspace);
}

std::string config_to_json(const PipelineConfig& c) {
    Json traj = Json::array();
    for (const auto& s : c.trajectory) traj.push_back(io::trajectory_json(s));
    Json j{{"input_dir", c.input_dir.string()},
           {"camera_file", c.camera_file.string()},
           {"frames", c.frames},
           {"width", c.width},
           {"height", c.height},
           {"init_prompt", c.init_prompt},
           {"trajectory", traj},
           {"prompts", c.prompts},
           {"outpaint",
            {{"mode", c.outpaint.mode == OutpaintConfig::Mode::stub ? "stub" : "external"},
             {"stub", to_string(c.outpaint.stub)},
             {"exchange_dir", c.outpaint.exchange_dir.string()},
             {"timeout_s", c.outpaint.timeout_s},
             {"drift_tolerance", c.outpaint.drift_tolerance}}},
           {"splat_radius", c.splat_radius},
           {"index", {{"leaf_size", c.index.leaf_size}, {"max_depth", c.index.max_depth}}},
           {"output_dir", c.output_dir.string()},
           {"artifacts_dir", c.artifacts_dir.string()},
           {"seed", c.seed},
           {"complete_background", c.complete_background},
           {"overlap_band", {c.overlap_low, c.overlap_high}}};
    return j.dump(2);
}

void write_input_video(const fs::path& dir, const InitInput& input) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string());
    for (std::size_t t = 0; t < input.frames.size(); ++t) {
        const auto& f = input.frames[t];
        const int ti = static_cast<int>(t);
        io::write_png(dir / io::frame_name(ti, "rgb.png"), f.rgb);
        io::write_pfm(dir / io::frame_name(ti, "depth.pfm"), f.depth);
        io::write_mask_png(dir / io::frame_name(ti, "mask.png"), f.fg_mask);
    }
    io::write_camera(dir / "camera.json", input.camera);
}

InitInput read_input_video(const fs::path& dir, const Camera& camera) {
    if (!fs::is_directory(dir)) throw IoError("input directory " + dir.string() + " does not exist");
    int n = 0;
    while (fs::exists(dir / io::frame_name(n, "rgb.png"))) ++n;
    if (n == 0) {
        throw ValidationError("no frames in " + dir.string() + " (expected frame_000_rgb.png, ...)");
    }
    InitInput input;
    input.camera = camera;
    const int w = camera.width();
    const int h = camera.height();
    auto check = [&](const fs::path& file, int fw, int fh) {
        if (fw != w || fh != h) {
            throw ValidationError(file.string() + " is " + std::to_string(fw) + "x" +
                                  std::to_string(fh) + ", camera expects " + std::to_string(w) +
                                  "x" + std::to_string(h));
        }
    };
    for (int t = 0; t < n; ++t) {
        FrameBundle f;
        f.timestamp = t;
        const fs::path rgb = dir / io::frame_name(t, "rgb.png");
        const fs::path depth = dir / io::frame_name(t, "depth.pfm");
        const fs::path mask = dir / io::frame_name(t, "mask.png");
        f.rgb = io::read_png_rgb(rgb);
        check(rgb, f.rgb.width(), f.rgb.height());
        f.depth = io::read_pfm(depth);
        check(depth, f.depth.width(), f.depth.height());
        f.fg_mask = io::read_mask_png(mask);
        check(mask, f.fg_mask.width(), f.fg_mask.height());
        input.frames.push_back(std::move(f));
    }
    return input;
}

std::unique_ptr<Outpainter> make_outpainter(const PipelineConfig& config) {
    if (config.outpaint.mode == OutpaintConfig::Mode::stub) {
        return std::make_unique<StubOutpainter>(config.outpaint.stub);
    }
    ExchangeOptions options;
    options.timeout = std::chrono::milliseconds(
        static_cast<std::int64_t>(std::llround(config.outpaint.timeout_s * 1000.0)));
    options.drift_tolerance = config.outpaint.drift_tolerance;
    return std::make_unique<ExternalOutpainter>(config.resolve(config.outpaint.exchange_dir),
                                                options);
}

DepthMap estimate_depth_stub(const ConditioningFrame& frame, double fallback) {
    const int w = frame.ray_depth.width();
    const int h = frame.ray_depth.height();
    if (count_set(frame.observed) == 0) return DepthMap(w, h, fallback);
    return interpolate_depth_map(frame.ray_depth, frame.observed, invert(frame.observed));
}

namespace {

PipelineConfig checked_input_config(const PipelineConfig& config, const InitInput& input) {
    const int n = static_cast<int>(input.frames.size());
    if (config.frames != 0 && config.frames != n) {
        throw ValidationError("config expects " + std::to_string(config.frames) +
                              " frames, input has " + std::to_string(n));
    }
    if ((config.width != 0 && config.width != input.camera.width()) ||
        (config.height != 0 && config.height != input.camera.height())) {
        throw ValidationError("config size " + std::to_string(config.width) + "x" +
                              std::to_string(config.height) + " disagrees with the camera");
    }
    return config;
}

InitInput load_input(const PipelineConfig& config) {
    const Camera camera = io::read_camera(config.resolve(config.camera_file));
    InitInput input = read_input_video(config.resolve(config.input_dir), camera);
    input.scene_prompt = config.init_prompt;
    checked_input_config(config, input);
    return input;
}

} // namespace

InitReport cmd_init(const PipelineConfig& config) {
    const InitInput input = load_input(config);
    InitDiagnostics diagnostics;
    SceneState scene = initialize_scene(input, &diagnostics);
    scene.config_json = config_to_json(config);

    InitReport report;
    report.frames = scene.frame_count();
    report.foreground_points = scene.cloud.foreground_count();
    report.background_points = scene.cloud.background.size();
    report.skipped_pixels = diagnostics.skipped_count();
    report.occluded_pixels = count_set(scene.occluded_background[0]);
    if (config.complete_background && report.occluded_pixels > 0) {
        auto outpainter = make_outpainter(config);
        scene = complete_background(scene, *outpainter, 0, config.splat_radius, config.index);
        report.completed_points = scene.cloud.background.size() - report.background_points;
    }
    io::write_scene_atomic(config.resolve(config.output_dir), scene);
    return report;
}

StepReport cmd_step(const PipelineConfig& config, const Camera& pose, const std::string& prompt) {
    const fs::path scene_dir = config.resolve(config.output_dir);
    const SceneState scene = io::read_scene(scene_dir);
    const Camera& reference = scene.poses.front();
    if (pose.width() != reference.width() || pose.height() != reference.height()) {
        throw ValidationError("step pose image size differs from the scene's");
    }
    StepReport report;
    report.step_index = scene.poses.size();
    report.points_before = scene.point_count();

    const RayConditioningBundle bundle =
        build_bundle(scene.cloud, pose, prompt, config.splat_radius, config.index);
    const fs::path artifacts =
        config.resolve(config.artifacts_dir) / numbered("step_%03d", report.step_index);
    std::error_code ec;
    fs::remove_all(artifacts, ec);
    io::write_bundle(artifacts / "bundle", bundle);

    double mean_fraction = 0.0;
    for (const auto& f : bundle.frames) {
        const double frac = static_cast<double>(count_set(f.observed)) /
                            static_cast<double>(f.observed.size());
        report.observed_fraction.push_back(frac);
        mean_fraction += frac / bundle.frame_count();
    }
    report.overlap_warning = mean_fraction < config.overlap_low || mean_fraction > config.overlap_high;

    auto outpainter = make_outpainter(config);
    const OutpaintResult result = outpainter->outpaint(bundle);
    check_result(bundle, result, config.outpaint.drift_tolerance);
    report.provenance = result.provenance;
    report.fallback_frames = result.fallback_frames;
    io::write_result(artifacts / "result", result, bundle.width(), bundle.height());

    const double fallback = fallback_depth(scene.cloud, pose);
    const int w = pose.width();
    const int h = pose.height();
    std::vector<DepthMap> aligned;
    std::vector<Mask> fg_masks, observed;
    for (int t = 0; t < bundle.frame_count(); ++t) {
        const auto& f = bundle.frames[t];
        const DepthMap estimated =
            result.depths.empty() ? estimate_depth_stub(f, fallback) : result.depths[t];
        if (count_set(f.observed) > 0) {
            AlignedDepth a = align_depth(estimated, f.ray_depth, f.observed);
            report.fits.push_back(a.fit);
            aligned.push_back(std::move(a.depth));
        } else {
            report.fits.push_back(AffineDepthFit{});
            aligned.push_back(estimated);
        }
        io::write_pfm(artifacts / io::frame_name(t, "aligned_depth.pfm"), aligned.back());
        fg_masks.push_back(result.foreground.empty() ? Mask(w, h) : result.foreground[t]);
        observed.push_back(f.observed);
    }

    const auto tag = static_cast<PoseIndex>(report.step_index);
    const LiftedContent lifted =
        lift_new_content(result.frames, aligned, fg_masks, observed, pose, tag);
    SceneState next = merge_update(scene, lifted, pose, prompt);
    if (config.complete_background) {
        auto completer = make_outpainter(config);
        next = complete_background(next, *completer, report.step_index, config.splat_radius,
                                   config.index);
    }
    report.points_after = next.point_count();

    Json fits = Json::array();
    for (const auto& f : report.fits) fits.push_back(fit_json(f));
    const Json summary{{"step", report.step_index},
                       {"prompt", prompt},
                       {"provenance", report.provenance},
                       {"points_before", report.points_before},
                       {"points_after", report.points_after},
                       {"observed_fraction", report.observed_fraction},
                       {"overlap_warning", report.overlap_warning},
                       {"fallback_frames", report.fallback_frames},
                       {"depth_fits", fits},
                       {"camera", io::camera_json(pose)}};
    io::write_text(artifacts / "step.json", summary.dump(2) + "\n");

    io::write_scene_atomic(scene_dir, next);
    return report;
}

std::vector<std::pair<Camera, std::string>> trajectory_poses(const PipelineConfig& config,
                                                             const Camera& start) {
    std::vector<std::pair<Camera, std::string>> out;
    Camera current = start;
    for (std::size_t s = 0; s < config.trajectory.size(); ++s) {
        for (const auto& cam : generate(config.trajectory[s], current)) {
            out.emplace_back(cam, config.prompts[s]);
            current = cam;
        }
    }
    return out;
}

std::vector<StepReport> cmd_run(const PipelineConfig& config) {
    cmd_init(config);
    const SceneState scene = io::read_scene(config.resolve(config.output_dir));
    std::vector<StepReport> reports;
    for (const auto& [camera, prompt] : trajectory_poses(config, scene.poses.back())) {
        reports.push_back(cmd_step(config, camera, prompt));
    }
    return reports;
}

std::vector<CoverageRow> cmd_render(const PipelineConfig& config,
                                    const std::vector<Camera>& cameras, const fs::path& out_dir) {
    const SceneState scene = io::read_scene(config.resolve(config.output_dir));
    const std::vector<Camera>& poses = cameras.empty() ? scene.poses : cameras;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string());
    std::vector<CoverageRow> rows;
    for (std::size_t p = 0; p < poses.size(); ++p) {
        const auto frames = rasterize_video(scene.cloud, poses[p], config.splat_radius);
        for (std::size_t t = 0; t < frames.size(); ++t) {
            io::write_png(out_dir / numbered("render_%03d_%03d.png", p, t), frames[t].partial_rgb);
            rows.push_back({p, static_cast<int>(t), observed_fraction(frames[t])});
        }
    }
    std::ofstream csv(out_dir / "coverage.csv", std::ios::trunc);
    if (!csv) throw IoError("cannot create " + (out_dir / "coverage.csv").string());
    csv << "pose,timestamp,observed_fraction\n";
    for (const auto& r : rows) {
        char line[96];
        std::snprintf(line, sizeof(line), "%zu,%d,%.9f\n", r.pose, r.timestamp,
                      r.observed_fraction);
        csv << line;
    }
    csv.close();
    if (!csv) throw IoError("cannot write " + (out_dir / "coverage.csv").string());
    return rows;
}

DataprepReport cmd_dataprep(const PipelineConfig& config, std::optional<double> closer_offset,
                            std::optional<double> target_fraction, const fs::path& out_dir) {
    if (closer_offset.has_value() == target_fraction.has_value()) {
        throw ValidationError("dataprep needs exactly one of a closer offset or a target fraction");
    }
    const InitInput input = load_input(config);
    TrainingVideo video;
    for (const auto& f : input.frames) {
        video.rgb.push_back(f.rgb);
        video.depth.push_back(f.depth);
    }
    TrainingSampleOptions options;
    options.splat_radius = config.splat_radius;
    options.index_params = config.index;
    double offset = closer_offset.value_or(0.0);
    if (target_fraction) {
        offset = search_offset_for_fraction(video, input.camera, *target_fraction, 0.02, options)
                     .offset;
    }
    TrainingSample sample = prepare_training_sample(video, input.camera, offset, options);
    sample.bundle.scene_prompt = config.init_prompt;
    io::write_bundle(out_dir, sample.bundle);
    for (std::size_t t = 0; t < sample.target.size(); ++t) {
        io::write_png(out_dir / io::frame_name(static_cast<int>(t), "target_rgb.png"),
                      sample.target[t]);
    }
    return {offset, sample.unseen_fraction, static_cast<int>(sample.target.size())};
}

} // namespace dynscene
