// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/errors.hpp"
#include "dynscene/io/ply.hpp"
#include "dynscene/io/png.hpp"
#include "dynscene/io/scene_io.hpp"
#include "dynscene/pipeline.hpp"
#include "dynscene/synthetic.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace dynscene;
using dynscene::testing::TempDir;
namespace fs = std::filesystem;

namespace {

InitInput workspace_video(int frames, int size, double travel = 0.0) {
    synthetic::VideoOptions o;
    o.frames = frames;
    o.width = size;
    o.height = size;
    o.sphere_travel = travel;
    return synthetic::make_video(o);
}

PipelineConfig make_workspace(const fs::path& ws, const InitInput& video) {
    write_input_video(ws / "input", video);
    io::write_camera(ws / "input/camera.json", video.camera);
    PipelineConfig c;
    c.workspace = ws;
    c.outpaint.stub = StubMode::constant;
    return c;
}

Camera moved(const Camera& c, const Eigen::Vector3d& t, double yaw = 0.0) {
    RigidTransform step;
    step.rotation = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix();
    step.translation = t;
    return c.with_pose(c.pose() * step);
}

std::size_t count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

} // namespace

TEST(PipelineInit, WritesOnePlyPerFrameWithSharedBackground) {
    TempDir ws("pipe_init");
    const InitInput video = workspace_video(16, 24);
    const PipelineConfig c = make_workspace(ws.path(), video);
    const InitReport r = cmd_init(c);
    EXPECT_EQ(r.frames, 16);
    std::size_t fg_pixels = 0;
    for (const auto& f : video.frames) fg_pixels += count_set(f.fg_mask);
    EXPECT_EQ(r.foreground_points, fg_pixels);
    EXPECT_GT(r.occluded_pixels, 0u);
    EXPECT_EQ(r.background_points + r.completed_points, 24u * 24u);

    std::vector<float> first;
    for (int t = 0; t < 16; ++t) {
        char name[32];
        std::snprintf(name, sizeof name, "scene/frame_%03d.ply", t);
        const fs::path ply = ws / name;
        ASSERT_TRUE(fs::exists(ply)) << ply;
        const auto table = io::read_ply(ply);
        const std::size_t layer = table.column("layer");
        std::vector<float> bg;
        for (std::size_t row = 0; row < table.rows(); ++row) {
            if (table.get(row, layer) != 0.0) continue;
            for (const char* axis : {"x", "y", "z"}) bg.push_back(table.get_float(row, table.column(axis)));
        }
        EXPECT_EQ(bg.size(), 3u * 24u * 24u);
        if (t == 0) first = bg;
        else EXPECT_EQ(bg, first);
    }
}

TEST(PipelineInit, WrongFrameSizeNamesFile) {
    TempDir ws("pipe_badframe");
    const PipelineConfig c = make_workspace(ws.path(), workspace_video(4, 16));
    io::write_png(ws / "input/frame_002_rgb.png", RgbImage(15, 16));
    try {
        cmd_init(c);
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("frame_002_rgb.png"), std::string::npos) << e.what();
    }
    EXPECT_FALSE(fs::exists(ws / "scene"));
}

TEST(PipelineInit, MissingInputIsIoError) {
    TempDir ws("pipe_missing");
    PipelineConfig c;
    c.workspace = ws.path();
    EXPECT_THROW(cmd_init(c), IoError);
}

TEST(PipelineStep, SamePoseAddsAlmostNothing) {
    TempDir ws("pipe_same");
    const InitInput video = workspace_video(4, 32, 0.8);
    const PipelineConfig c = make_workspace(ws.path(), video);
    cmd_init(c);
    const StepReport r = cmd_step(c, video.camera, "same");
    EXPECT_LE(r.points_after, r.points_before + r.points_before / 100);
    EXPECT_GE(r.points_after, r.points_before);
    EXPECT_TRUE(fs::exists(ws / "steps/step_001/bundle/manifest.json"));
    EXPECT_TRUE(fs::exists(ws / "steps/step_001/result/manifest.json"));
    EXPECT_TRUE(fs::exists(ws / "steps/step_001/step.json"));
    const SceneState s = io::read_scene(ws / "scene");
    EXPECT_EQ(s.poses.size(), 2u);
    EXPECT_EQ(s.prompts.back(), "same");
}

TEST(PipelineStep, DisjointViewLiftsWholeFrame) {
    TempDir ws("pipe_disjoint");
    const InitInput video = workspace_video(3, 20, 0.8);
    const PipelineConfig c = make_workspace(ws.path(), video);
    cmd_init(c);
    const Camera away = moved(video.camera, Eigen::Vector3d::Zero(), M_PI);
    const StepReport r = cmd_step(c, away, "behind");
    for (double f : r.observed_fraction) EXPECT_EQ(f, 0.0);
    EXPECT_EQ(r.points_after - r.points_before, 20u * 20u);
    EXPECT_TRUE(r.overlap_warning);
    const SceneState s = io::read_scene(ws / "scene");
    std::size_t tagged = 0;
    for (auto p : s.cloud.background.source_pose) tagged += p == 1;
    EXPECT_EQ(tagged, 20u * 20u);
}

TEST(PipelineStep, ExternalTimeoutLeavesStateUntouched) {
    TempDir ws("pipe_timeout");
    const InitInput video = workspace_video(2, 16, 0.8);
    PipelineConfig c = make_workspace(ws.path(), video);
    cmd_init(c);
    const std::string before = dynscene::testing::tree_bytes(ws / "scene");
    c.outpaint.mode = OutpaintConfig::Mode::external;
    c.outpaint.timeout_s = 0.2;
    EXPECT_THROW(cmd_step(c, moved(video.camera, {0.1, 0, 0}), "x"), ExchangeTimeout);
    EXPECT_EQ(dynscene::testing::tree_bytes(ws / "scene"), before);
}

TEST(PipelineRender, ReproducesInputAtSourcePose) {
    TempDir ws("pipe_render");
    const InitInput video = workspace_video(3, 24, 0.8);
    PipelineConfig c = make_workspace(ws.path(), video);
    c.splat_radius = 0;
    cmd_init(c);
    const auto rows = cmd_render(c, {}, ws / "render");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(count_lines(ws / "render/coverage.csv"), 4u);
    for (int t = 0; t < 3; ++t) {
        EXPECT_EQ(rows[t].observed_fraction, 1.0);
        char name[64];
        std::snprintf(name, sizeof name, "render/render_000_%03d.png", t);
        EXPECT_EQ(io::read_png_rgb(ws / name), video.frames[t].rgb) << t;
    }
}

TEST(PipelineRender, CoverageShrinksMovingAway) {
    TempDir ws("pipe_cov");
    const InitInput video = workspace_video(2, 32, 0.8);
    const PipelineConfig c = make_workspace(ws.path(), video);
    cmd_init(c);
    std::vector<Camera> cams;
    for (int k = 0; k < 5; ++k) cams.push_back(moved(video.camera, {0, 0, -0.5 * k}));
    const auto rows = cmd_render(c, cams, ws / "r");
    ASSERT_EQ(rows.size(), 10u);
    EXPECT_EQ(count_lines(ws / "r/coverage.csv"), 11u);
    for (int t = 0; t < 2; ++t) {
        for (int k = 1; k < 5; ++k) {
            EXPECT_LE(rows[k * 2 + t].observed_fraction, rows[(k - 1) * 2 + t].observed_fraction);
        }
        EXPECT_LT(rows[8 + t].observed_fraction, 0.9);
    }
}

TEST(PipelineRun, DeterministicAcrossRuns) {
    std::string bytes[2];
    for (int i = 0; i < 2; ++i) {
        TempDir ws("pipe_det");
        PipelineConfig c = make_workspace(ws.path(), workspace_video(3, 24, 0.8));
        c.outpaint.stub = StubMode::nearest_observed;
        TrajectorySpec back;
        back.n_steps = 2;
        back.step_translation = 0.3;
        TrajectorySpec turn;
        turn.kind = TrajectoryKind::rotate;
        turn.n_steps = 2;
        c.trajectory = {back, turn};
        c.prompts = {"a", "b"};
        const auto reports = cmd_run(c);
        EXPECT_EQ(reports.size(), 4u);
        bytes[i] = dynscene::testing::tree_bytes(ws / "scene") + dynscene::testing::tree_bytes(ws / "steps");
    }
    EXPECT_EQ(bytes[0], bytes[1]);
}

TEST(PipelineConfig, ParsesAndRoundTrips) {
    PipelineConfig c;
    c.workspace = "/tmp/x";
    TrajectorySpec t;
    t.kind = TrajectoryKind::rotate;
    t.n_steps = 5;
    t.axis = {1, 0, 0};
    c.trajectory = {t};
    c.prompts = {"hello"};
    c.outpaint.mode = OutpaintConfig::Mode::external;
    c.outpaint.timeout_s = 12.5;
    c.overlap_low = 0.1;
    const std::string json = config_to_json(c);
    const PipelineConfig back = parse_config(json, "/tmp/x");
    EXPECT_EQ(config_to_json(back), json);
    EXPECT_EQ(back.trajectory[0].axis, Eigen::Vector3d(1, 0, 0));
    EXPECT_EQ(back.outpaint.mode, OutpaintConfig::Mode::external);
}

TEST(PipelineConfig, RejectsUnknownKeysAndMismatches) {
    EXPECT_THROW(parse_config(R"({"framez": 3})", "."), ValidationError);
    EXPECT_THROW(parse_config(R"({"outpaint": {"mod": "stub"}})", "."), ValidationError);
    EXPECT_THROW(parse_config(R"({"outpaint": {"stub": "blur"}})", "."), ValidationError);
    EXPECT_THROW(parse_config(R"({"trajectory": [{"kind": "translate_line"}], "prompts": ["a", "b"]})", "."),
                 ValidationError);
    EXPECT_THROW(parse_config(R"({"trajectory": [{"kind": "spiral"}]})", "."), ValidationError);
    EXPECT_THROW(parse_config(R"({"splat_radius": -1})", "."), ValidationError);
    EXPECT_THROW(parse_config("[1]", "."), ValidationError);
    const auto c = parse_config(R"({"trajectory": [{"kind": "translate_line"}, {"kind": "rotate"}]})", ".");
    EXPECT_EQ(c.prompts, (std::vector<std::string>{"", ""}));
}

TEST(PipelineDataprep, WritesSampleAndRejectsAmbiguousRequests) {
    TempDir ws("pipe_dataprep");
    const PipelineConfig c = make_workspace(ws.path(), workspace_video(2, 32, 0.8));
    const auto r = cmd_dataprep(c, 1.0, std::nullopt, ws / "sample");
    EXPECT_EQ(r.frames, 2);
    EXPECT_GT(r.unseen_fraction, 0.0);
    EXPECT_TRUE(fs::exists(ws / "sample/manifest.json"));
    EXPECT_TRUE(fs::exists(ws / "sample/frame_001_target_rgb.png"));
    const auto f = cmd_dataprep(c, std::nullopt, 0.4, ws / "sample2");
    EXPECT_NEAR(f.unseen_fraction, 0.4, 0.02);
    EXPECT_THROW(cmd_dataprep(c, 1.0, 0.4, ws / "s3"), ValidationError);
    EXPECT_THROW(cmd_dataprep(c, std::nullopt, std::nullopt, ws / "s3"), ValidationError);
}

#ifdef DYNSCENE_CLI_BIN
namespace {

int cli(const std::string& args) {
    const std::string cmd = std::string(DYNSCENE_CLI_BIN) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(PipelineCli, ExitCodes) {
    TempDir ws("pipe_cli");
    const std::string w = "--workspace " + ws.path().string();
    EXPECT_EQ(cli(w + " synth --frames 2 --width 16 --height 16"), 0);
    EXPECT_EQ(cli(w + " init"), 0);
    EXPECT_EQ(cli(w + " render --out r"), 0);
    EXPECT_TRUE(fs::exists(ws / "r/coverage.csv"));
    EXPECT_EQ(cli(w + " bogus"), 2);
    EXPECT_EQ(cli(w + " init --no-such-flag"), 2);
    EXPECT_EQ(cli(w + " synth --background spiral"), 2);
    EXPECT_EQ(cli(w + " init --config missing.json"), 4);
    io::write_text(ws / "bad.json", R"({"nonsense": 1})");
    EXPECT_EQ(cli(w + " init --config bad.json"), 2);
    EXPECT_EQ(cli(w + " dataprep --offset 1 --fraction 0.3 --out d"), 2);

    const std::string cfg = io::read_text(ws / "config.json");
    PipelineConfig c = parse_config(cfg, ws.path());
    c.outpaint.mode = OutpaintConfig::Mode::external;
    c.outpaint.timeout_s = 0.2;
    io::write_text(ws / "external.json", config_to_json(c));
    const Camera start = io::read_scene(ws / "scene").poses[0];
    io::write_camera(ws / "pose.json", moved(start, {0.2, 0, 0}));
    EXPECT_EQ(cli(w + " step --config external.json --pose pose.json"), 3);
    EXPECT_EQ(cli(w + " step --pose pose.json --prompt next"), 0);
    EXPECT_EQ(cli(w + " oracle --quick --seeds 1"), 0);
}
#endif
