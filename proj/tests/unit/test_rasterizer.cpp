// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/errors.hpp"
#include "dynscene/parallel.hpp"
#include "dynscene/rasterizer.hpp"
#include "dynscene/scene_init.hpp"
#include "dynscene/synthetic.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dynscene;
using dynscene::testing::brute_rasterize;
using dynscene::testing::flatten;
using dynscene::testing::test_camera;

namespace {

constexpr Rgb kRed{255, 0, 0};
constexpr Rgb kBlue{0, 0, 255};

PointSet random_cloud(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> byte(0, 255);
    PointSet s;
    for (const auto& p : synthetic::uniform_points(n, {-1.5, -1.5, -0.5}, {1.5, 1.5, 3.0}, seed)) {
        s.push_back(p, Rgb{static_cast<std::uint8_t>(byte(rng)), static_cast<std::uint8_t>(byte(rng)),
                           static_cast<std::uint8_t>(byte(rng))},
                    0);
    }
    return s;
}

void expect_same(const RasterOutput& a, const RasterOutput& b) {
    EXPECT_EQ(a.observed, b.observed);
    EXPECT_EQ(a.ray_depth, b.ray_depth);
    EXPECT_EQ(a.partial_rgb, b.partial_rgb);
    EXPECT_EQ(a.invalid_color, b.invalid_color);
    EXPECT_EQ(a.foreground, b.foreground);
}

} // namespace

TEST(Rasterize, SinglePoint) {
    PointSet s;
    s.push_back(Position(0, 0, 2), kRed, 0);
    const RasterOutput r = rasterize(s, test_camera(), 0);
    EXPECT_EQ(count_set(r.observed), 1u);
    EXPECT_EQ(r.observed(256, 256), 1);
    EXPECT_EQ(r.ray_depth(256, 256), 2.0);
    EXPECT_EQ(r.partial_rgb(256, 256), kRed);
}

TEST(Rasterize, NearestWins) {
    PointSet s;
    s.push_back(Position(0, 0, 3), kBlue, 0);
    s.push_back(Position(0, 0, 2), kRed, 0);
    const RasterOutput r = rasterize(s, test_camera(), 0);
    EXPECT_EQ(r.partial_rgb(256, 256), kRed);
    EXPECT_EQ(r.ray_depth(256, 256), 2.0);
}

TEST(Rasterize, TieKeepsLowestIndex) {
    PointSet s;
    s.push_back(Position(0, 0, 2), kBlue, 0);
    s.push_back(Position(0, 0, 2), kRed, 0);
    EXPECT_EQ(rasterize(s, test_camera(), 0).partial_rgb(256, 256), kBlue);
}

TEST(Rasterize, SplatRadiusCoversSquare) {
    PointSet s;
    s.push_back(Position(0, 0, 2), kRed, 0);
    const RasterOutput r = rasterize(s, test_camera(), 2);
    EXPECT_EQ(count_set(r.observed), 25u);
    EXPECT_EQ(r.observed(254, 254), 1);
    EXPECT_EQ(r.observed(258, 258), 1);
    EXPECT_EQ(r.observed(259, 256), 0);
}

TEST(Rasterize, DiscardsBehindAndOutside) {
    PointSet s;
    s.push_back(Position(0, 0, -2), kRed, 0);
    s.push_back(Position(100, 0, 2), kRed, 0);
    EXPECT_EQ(count_set(rasterize(s, test_camera(), 1).observed), 0u);
}

TEST(Rasterize, NegativeRadiusRejected) {
    EXPECT_THROW(rasterize(PointSet{}, test_camera(), -1), ValidationError);
}

TEST(RasterizeProperty, MatchesBruteForce) {
    const Camera cam = test_camera(64, 64, 40.0);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const PointSet cloud = random_cloud(4000, seed);
        for (int radius : {0, 1, 3}) {
            expect_same(rasterize(cloud, cam, radius), brute_rasterize(flatten(cloud), cam, radius));
        }
    }
}

TEST(RasterizeProperty, LayeredVideoMatchesBruteForce) {
    synthetic::VideoOptions o;
    o.frames = 3;
    o.width = 40;
    o.height = 32;
    const InitInput in = synthetic::make_video(o);
    const SceneState s = initialize_scene(in);
    RigidTransform side;
    side.translation = {0.4, -0.1, -0.5};
    const Camera cam = in.camera.with_pose(side);
    const auto frames = rasterize_video(s.cloud, cam, 1);
    for (int t = 0; t < 3; ++t) expect_same(frames[t], brute_rasterize(flatten(s.cloud, t), cam, 1));
}

TEST(RasterizeProperty, DeterministicAcrossThreads) {
    const PointSet cloud = random_cloud(20000, 9);
    const Camera cam = test_camera(128, 96, 60.0);
    set_thread_count(1);
    const RasterOutput a = rasterize(cloud, cam, 1);
    set_thread_count(7);
    const RasterOutput b = rasterize(cloud, cam, 1);
    set_thread_count(0);
    expect_same(a, b);
}

TEST(RasterizeProperty, AddingPointsNeverShrinksMask) {
    const Camera cam = test_camera(64, 64, 40.0);
    const PointSet base = random_cloud(500, 4);
    PointSet more = base;
    more.append(random_cloud(500, 5));
    const RasterOutput a = rasterize(base, cam, 1);
    const RasterOutput b = rasterize(more, cam, 1);
    for (std::size_t i = 0; i < a.observed.size(); ++i) {
        if (a.observed[i]) EXPECT_EQ(b.observed[i], 1);
        if (b.observed[i]) EXPECT_GT(b.ray_depth[i], 0.0);
    }
}

TEST(RasterizeVideo, SourcePoseCoverage) {
    synthetic::VideoOptions o;
    o.frames = 4;
    o.width = 64;
    o.height = 64;
    const InitInput in = synthetic::make_video(o);
    const SceneState s = initialize_scene(in);
    const auto frames = rasterize_video(s.cloud, in.camera, 0);
    for (const auto& r : frames) EXPECT_GE(observed_fraction(r), 0.99);
}

TEST(RasterizeVideo, CameraBehindSceneSeesNothing) {
    synthetic::VideoOptions o;
    o.frames = 2;
    o.width = 32;
    o.height = 32;
    const InitInput in = synthetic::make_video(o);
    const SceneState s = initialize_scene(in);
    RigidTransform turned;
    turned.rotation = Eigen::AngleAxisd(3.14159265358979, Eigen::Vector3d::UnitY()).toRotationMatrix();
    turned.translation = {0, 0, -50};
    for (const auto& r : rasterize_video(s.cloud, in.camera.with_pose(turned), 1)) {
        EXPECT_EQ(count_set(r.observed), 0u);
    }
}

TEST(RasterizeVideo, BackgroundColorsVaryGeometryDoesNot) {
    BackgroundLayer bg(2);
    const std::vector<std::uint8_t> valid{1, 1};
    for (int i = 0; i < 10; ++i) {
        const std::vector<Rgb> colors{Rgb{static_cast<std::uint8_t>(i), 0, 0}, Rgb{0, static_cast<std::uint8_t>(i), 0}};
        bg.push_back(Position(0.1f * i - 0.5f, 0, 2), colors, valid, 0);
    }
    DynamicPointCloud cloud(2);
    cloud.background = bg;
    const auto f = rasterize_video(cloud, test_camera(64, 64, 30.0), 0);
    EXPECT_EQ(f[0].observed, f[1].observed);
    EXPECT_EQ(f[0].ray_depth, f[1].ray_depth);
    EXPECT_NE(f[0].partial_rgb, f[1].partial_rgb);
}

TEST(RasterizeVideo, InvalidBackgroundColorStillOccludes) {
    BackgroundLayer bg(2);
    bg.push_back(Position(0, 0, 2), std::vector<Rgb>{kRed, kRed}, std::vector<std::uint8_t>{1, 0}, 0);
    DynamicPointCloud cloud(2);
    cloud.background = bg;
    cloud.foreground[1].push_back(Position(0, 0, 3), kBlue, 0);
    const auto f = rasterize_video(cloud, test_camera(), 0);
    EXPECT_EQ(f[0].partial_rgb(256, 256), kRed);
    EXPECT_EQ(f[0].invalid_color(256, 256), 0);
    EXPECT_EQ(f[1].partial_rgb(256, 256), kInvalidColorFill);
    EXPECT_EQ(f[1].invalid_color(256, 256), 1);
    EXPECT_EQ(f[1].foreground(256, 256), 0);
}

TEST(RasterizeVideo, ForegroundFlagged) {
    DynamicPointCloud cloud(1);
    cloud.foreground[0].push_back(Position(0, 0, 2), kBlue, 0);
    const auto f = rasterize_video(cloud, test_camera(), 0);
    EXPECT_EQ(f[0].foreground(256, 256), 1);
}
