// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
//
// dynscene command line: scene initialization, outpainting steps, rendering,
// oracle self-checks and training-data preparation.

#include "dynscene/errors.hpp"
#include "dynscene/io/scene_io.hpp"
#include "dynscene/oracle.hpp"
#include "dynscene/parallel.hpp"
#include "dynscene/pipeline.hpp"
#include "dynscene/synthetic.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace dynscene;

namespace {

enum ExitCode { kOk = 0, kValidation = 2, kBridge = 3, kIo = 4 };

struct Globals {
    std::string workspace = ".";
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string config = "config.json";
};

PipelineConfig load(const Globals& g) {
    PipelineConfig config = load_config(g.config, g.workspace);
    if (g.seed) config.seed = *g.seed;
    return config;
}

void print_step(const StepReport& r, const PipelineConfig& config) {
    double mean = 0.0;
    for (double f : r.observed_fraction) mean += f / static_cast<double>(r.observed_fraction.size());
    std::printf("step %zu: %zu -> %zu points, observed %.4f, outpainter %s\n", r.step_index,
                r.points_before, r.points_after, mean, r.provenance.c_str());
    if (r.overlap_warning) {
        std::fprintf(stderr,
                     "warning: step %zu observed fraction %.4f is outside [%.2f, %.2f]\n",
                     r.step_index, mean, config.overlap_low, config.overlap_high);
    }
    for (int t : r.fallback_frames) {
        std::fprintf(stderr, "warning: step %zu frame %d had nothing observed; constant fill used\n",
                     r.step_index, t);
    }
}

std::optional<synthetic::Background> parse_background(const std::string& name) {
    if (name == "plane") return synthetic::Background::plane;
    if (name == "tilted") return synthetic::Background::tilted_plane;
    if (name == "wavy") return synthetic::Background::wavy;
    return std::nullopt;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynscene: layered dynamic point-cloud scene engine"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--workspace", g.workspace, "Directory all config paths are relative to");
    app.add_option("--seed", g.seed, "Random seed (overrides the config)");
    app.add_option("--threads", g.threads, "Worker threads, 0 = all cores");

    auto* init = app.add_subcommand("init", "Build the initial scene from the input video");
    init->add_option("--config", g.config, "Pipeline config (JSON)");

    std::string pose_file;
    std::string prompt;
    auto* step = app.add_subcommand("step", "Outpaint one new pose and merge it into the scene");
    step->add_option("--config", g.config, "Pipeline config (JSON)");
    step->add_option("--pose", pose_file, "Camera JSON of the new pose")->required();
    step->add_option("--prompt", prompt, "Scene prompt for this step");

    auto* run = app.add_subcommand("run", "init followed by every trajectory step");
    run->add_option("--config", g.config, "Pipeline config (JSON)");

    std::string cameras_file;
    std::string out_dir;
    auto* render = app.add_subcommand("render", "Render the scene at a list of cameras");
    render->add_option("--config", g.config, "Pipeline config (JSON)");
    render->add_option("--cameras", cameras_file,
                       "{\"cameras\": [...]} file; defaults to the scene's own poses");
    render->add_option("--out", out_dir, "Output directory")->required();

    OracleConfig oracle_config;
    bool quick = false;
    auto* oracle = app.add_subcommand("oracle", "Check accelerated paths against brute force");
    oracle->add_option("--seeds", oracle_config.seeds, "Number of random seeds");
    oracle->add_option("--points", oracle_config.point_counts, "Point counts for ray queries");
    oracle->add_option("--rays", oracle_config.ray_grid, "Ray grid size per side");
    oracle->add_flag("--quick", quick, "Small scales only");

    std::optional<double> offset;
    std::optional<double> fraction;
    auto* dataprep = app.add_subcommand("dataprep", "Make a training sample from the input video");
    dataprep->add_option("--config", g.config, "Pipeline config (JSON)");
    auto* offset_opt = dataprep->add_option("--offset", offset, "Forward camera offset");
    auto* fraction_opt =
        dataprep->add_option("--fraction", fraction, "Target unseen fraction (searched)");
    offset_opt->excludes(fraction_opt);
    dataprep->add_option("--out", out_dir, "Output directory")->required();

    synthetic::VideoOptions synth_options;
    std::string background = "wavy";
    auto* synth = app.add_subcommand("synth", "Write a procedural input video and config");
    synth->add_option("--frames", synth_options.frames, "Frame count");
    synth->add_option("--width", synth_options.width, "Image width");
    synth->add_option("--height", synth_options.height, "Image height");
    synth->add_option("--background", background, "plane, tilted or wavy");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidation;
    }

    try {
        set_thread_count(g.threads);
        if (*init) {
            const PipelineConfig config = load(g);
            const InitReport r = cmd_init(config);
            std::printf("init: %d frames, %zu foreground + %zu background points, %zu skipped, "
                        "%zu occluded pixels, %zu completed points\n",
                        r.frames, r.foreground_points, r.background_points, r.skipped_pixels,
                        r.occluded_pixels, r.completed_points);
        } else if (*step) {
            const PipelineConfig config = load(g);
            const Camera pose = io::read_camera(config.resolve(pose_file));
            print_step(cmd_step(config, pose, prompt), config);
        } else if (*run) {
            const PipelineConfig config = load(g);
            for (const auto& r : cmd_run(config)) print_step(r, config);
        } else if (*render) {
            const PipelineConfig config = load(g);
            std::vector<Camera> cameras;
            if (!cameras_file.empty()) cameras = io::read_cameras(config.resolve(cameras_file));
            const auto rows = cmd_render(config, cameras, config.resolve(out_dir));
            std::printf("render: %zu frames written to %s\n", rows.size(),
                        config.resolve(out_dir).string().c_str());
        } else if (*oracle) {
            if (quick) {
                oracle_config.seeds = 2;
                oracle_config.point_counts = {1000, 10000};
                oracle_config.raster_points = 2000;
                oracle_config.video_size = 64;
            }
            const OracleReport report = run_oracle(oracle_config, g.seed.value_or(0));
            for (const auto& name : report.passed) std::printf("ok    %s\n", name.c_str());
            for (const auto& v : report.violations) {
                std::printf("FAIL  %s seed=%llu %s\n", v.check.c_str(),
                            static_cast<unsigned long long>(v.seed), v.detail.c_str());
            }
            std::printf("%zu checks passed, %zu violations\n", report.passed.size(),
                        report.violations.size());
            return report.ok() ? kOk : kValidation;
        } else if (*dataprep) {
            const PipelineConfig config = load(g);
            const DataprepReport r =
                cmd_dataprep(config, offset, fraction, config.resolve(out_dir));
            std::printf("dataprep: %d frames, closer_offset %.6g, unseen fraction %.4f\n", r.frames,
                        r.closer_offset, r.unseen_fraction);
        } else if (*synth) {
            const auto bg = parse_background(background);
            if (!bg) throw ValidationError("unknown background '" + background + "'");
            synth_options.background = *bg;
            synth_options.seed = g.seed.value_or(0);
            const InitInput input = synthetic::make_video(synth_options);
            const fs::path ws = g.workspace;
            write_input_video(ws / "input", input);
            PipelineConfig config;
            TrajectorySpec back;
            back.n_steps = 3;
            back.step_translation = 0.25;
            TrajectorySpec turn;
            turn.kind = TrajectoryKind::rotate;
            turn.n_steps = 3;
            config.trajectory = {back, turn};
            config.prompts = {"pull back", "turn"};
            config.seed = synth_options.seed;
            io::write_text(ws / "config.json", config_to_json(config) + "\n");
            std::printf("synth: %d frames of %dx%d written to %s\n", synth_options.frames,
                        synth_options.width, synth_options.height, (ws / "input").string().c_str());
        }
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return kValidation;
    } catch (const BridgeError& e) {
        std::fprintf(stderr, "outpaint bridge error: %s\n", e.what());
        return kBridge;
    } catch (const IoError& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return kIo;
    } catch (const fs::filesystem_error& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return kIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kOk;
}
