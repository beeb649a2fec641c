// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/errors.hpp"
#include "dynscene/rasterizer.hpp"
#include "dynscene/scene_init.hpp"
#include "dynscene/scene_update.hpp"
#include "dynscene/synthetic.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dynscene;

namespace {

Mask random_mask(int w, int h, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution on(p);
    Mask m(w, h);
    for (auto& v : m.pixels()) v = on(rng);
    return m;
}

double sse(const DepthMap& e, const DepthMap& r, const Mask& m, double s, double b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (!m[i]) continue;
        const double d = s * e[i] + b - r[i];
        acc += d * d;
    }
    return acc;
}

struct Video {
    std::vector<RgbImage> rgb;
    std::vector<DepthMap> depth;
    std::vector<Mask> fg;
    Camera camera;
};

Video as_video(const InitInput& in) {
    Video v;
    v.camera = in.camera;
    for (const auto& f : in.frames) {
        v.rgb.push_back(f.rgb);
        v.depth.push_back(f.depth);
        v.fg.push_back(f.fg_mask);
    }
    return v;
}

InitInput small_video(int frames, int size, double travel = 0.8) {
    synthetic::VideoOptions o;
    o.frames = frames;
    o.width = size;
    o.height = size;
    o.sphere_travel = travel;
    return synthetic::make_video(o);
}

} // namespace

TEST(AlignDepth, RecoversAffineMap) {
    DepthMap est(8, 6), ray(8, 6);
    Mask obs(8, 6, 1);
    for (std::size_t i = 0; i < est.size(); ++i) {
        ray[i] = 1.0 + 0.1 * static_cast<double>(i);
        est[i] = 2.0 * ray[i] + 1.0;
    }
    const auto a = align_depth(est, ray, obs);
    EXPECT_NEAR(a.fit.scale, 0.5, 1e-12);
    EXPECT_NEAR(a.fit.shift, -0.5, 1e-12);
    EXPECT_FALSE(a.fit.shift_only);
    EXPECT_LT(a.fit.rms_residual_after, 1e-12);
    for (std::size_t i = 0; i < est.size(); ++i) EXPECT_NEAR(a.depth[i], ray[i], 1e-12);
}

TEST(AlignDepth, ConstantEstimateIsShiftOnly) {
    DepthMap est(5, 5, 3.0), ray(5, 5);
    Mask obs(5, 5, 1);
    for (std::size_t i = 0; i < ray.size(); ++i) ray[i] = 1.0 + 0.01 * static_cast<double>(i);
    const auto a = align_depth(est, ray, obs);
    EXPECT_TRUE(a.fit.shift_only);
    EXPECT_EQ(a.fit.scale, 1.0);
    double mean = 0.0;
    for (auto v : ray.pixels()) mean += v;
    mean /= static_cast<double>(ray.size());
    EXPECT_NEAR(a.fit.shift, mean - 3.0, 1e-12);
}

TEST(AlignDepth, AntiCorrelatedIsShiftOnly) {
    DepthMap est(4, 4), ray(4, 4);
    for (std::size_t i = 0; i < est.size(); ++i) {
        est[i] = static_cast<double>(i);
        ray[i] = 20.0 - static_cast<double>(i);
    }
    EXPECT_TRUE(align_depth(est, ray, Mask(4, 4, 1)).fit.shift_only);
}

TEST(AlignDepth, MatchesNormalEquationsAndIsOptimal) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.5, 5.0);
    std::normal_distribution<double> noise(0.0, 0.05);
    for (int trial = 0; trial < 20; ++trial) {
        const int w = 23, h = 17;
        DepthMap est(w, h), ray(w, h);
        const Mask obs = random_mask(w, h, 0.4, 100 + trial);
        const double s = 0.3 + 0.1 * trial, b = -0.2 + 0.05 * trial;
        std::vector<double> ev, rv;
        for (std::size_t i = 0; i < est.size(); ++i) {
            est[i] = u(rng);
            ray[i] = s * est[i] + b + noise(rng);
            if (obs[i]) {
                ev.push_back(est[i]);
                rv.push_back(ray[i]);
            }
        }
        double os = 0.0, ob = 0.0;
        dynscene::testing::normal_equations_fit(ev, rv, os, ob);
        const auto a = align_depth(est, ray, obs);
        ASSERT_FALSE(a.fit.shift_only);
        EXPECT_NEAR(a.fit.scale, os, 1e-9);
        EXPECT_NEAR(a.fit.shift, ob, 1e-9);
        EXPECT_LE(a.fit.rms_residual_after, a.fit.rms_residual_before + 1e-15);
        const double best = sse(est, ray, obs, a.fit.scale, a.fit.shift);
        for (int i = -5; i <= 5; ++i)
            for (int j = -5; j <= 5; ++j) {
                if (i == 0 && j == 0) continue;
                EXPECT_GE(sse(est, ray, obs, a.fit.scale + 0.01 * i, a.fit.shift + 0.01 * j), best);
            }
    }
}

TEST(AlignDepth, NothingObservedThrows) {
    EXPECT_THROW(align_depth(DepthMap(3, 3, 1.0), DepthMap(3, 3, 1.0), Mask(3, 3)), ValidationError);
    EXPECT_THROW(align_depth(DepthMap(3, 3), DepthMap(4, 3), Mask(3, 3, 1)), ValidationError);
}

TEST(LiftNewContent, FullyObservedAddsNothing) {
    const Video v = as_video(small_video(3, 24));
    const std::vector<Mask> obs(3, Mask(24, 24, 1));
    const auto c = lift_new_content(v.rgb, v.depth, v.fg, obs, v.camera, 1);
    for (const auto& fg : c.foreground) EXPECT_TRUE(fg.empty());
    EXPECT_TRUE(c.background.empty());
    EXPECT_EQ(count_set(c.occluded), 0u);
}

TEST(LiftNewContent, FullyUnseenEqualsInitialization) {
    const InitInput in = small_video(3, 24);
    const Video v = as_video(in);
    const std::vector<Mask> obs(3, Mask(24, 24));
    const auto c = lift_new_content(v.rgb, v.depth, v.fg, obs, v.camera, 0);
    const SceneState s = initialize_scene(in);
    for (int t = 0; t < 3; ++t) {
        EXPECT_EQ(c.foreground[t].positions, s.cloud.foreground[t].positions);
        EXPECT_EQ(c.foreground[t].colors, s.cloud.foreground[t].colors);
    }
    EXPECT_EQ(c.background.positions, s.cloud.background.positions);
    EXPECT_EQ(c.background.colors, s.cloud.background.colors);
    EXPECT_EQ(c.background.valid, s.cloud.background.valid);
    EXPECT_EQ(c.occluded, s.occluded_background[0]);
}

TEST(LiftNewContent, PartialCountsMatchOracle) {
    const Video v = as_video(small_video(4, 32));
    std::vector<Mask> obs;
    for (int t = 0; t < 4; ++t) obs.push_back(random_mask(32, 32, 0.5, 40 + t));
    const auto c = lift_new_content(v.rgb, v.depth, v.fg, obs, v.camera, 2);
    std::size_t bg_expect = 0;
    for (std::size_t i = 0; i < obs[0].size(); ++i) {
        bool any = false;
        for (int t = 0; t < 4; ++t) any = any || (!v.fg[t][i] && !obs[t][i]);
        bg_expect += any;
    }
    EXPECT_EQ(c.background.size(), bg_expect);
    for (int t = 0; t < 4; ++t) {
        std::size_t fg_expect = 0;
        for (std::size_t i = 0; i < obs[t].size(); ++i) fg_expect += v.fg[t][i] && !obs[t][i];
        EXPECT_EQ(c.foreground[t].size(), fg_expect);
        for (auto p : c.foreground[t].source_pose) EXPECT_EQ(p, 2u);
    }
    // Background depth only averages unseen, non-foreground samples.
    for (std::size_t k = 0; k < c.background.size(); ++k) {
        const auto px = project(v.camera, c.background.positions[k].cast<double>());
        ASSERT_TRUE(px.has_value());
        const int x = pixel_index(px->x), y = pixel_index(px->y);
        const std::size_t i = obs[0].index(x, y);
        double sum = 0.0;
        int n = 0;
        for (int t = 0; t < 4; ++t) {
            if (v.fg[t][i] || obs[t][i]) continue;
            sum += v.depth[t][i];
            ++n;
        }
        ASSERT_GT(n, 0);
        EXPECT_NEAR(px->depth, sum / n, 1e-5 * px->depth);
    }
}

TEST(LiftNewContent, OccludedRequiresUnseen) {
    const Video v = as_video(small_video(3, 24, 0.0));
    std::vector<Mask> obs(3, Mask(24, 24));
    const auto all = lift_new_content(v.rgb, v.depth, v.fg, obs, v.camera, 1);
    ASSERT_GT(count_set(all.occluded), 0u);
    obs.assign(3, Mask(24, 24, 1));
    EXPECT_EQ(count_set(lift_new_content(v.rgb, v.depth, v.fg, obs, v.camera, 1).occluded), 0u);
}

TEST(MergeUpdate, AppendsWithProvenanceAndLeavesInputAlone) {
    const InitInput in = small_video(3, 24);
    const SceneState s = initialize_scene(in);
    const SceneState before = s;
    const Video v = as_video(in);
    RigidTransform pose;
    pose.translation = {0.2, 0.0, -0.3};
    const Camera cam = v.camera.with_pose(pose);
    std::vector<Mask> obs;
    for (int t = 0; t < 3; ++t) obs.push_back(random_mask(24, 24, 0.7, t));
    const auto c = lift_new_content(v.rgb, v.depth, v.fg, obs, cam, 99);
    const SceneState next = merge_update(s, c, cam, "next");

    EXPECT_EQ(next.poses.size(), 2u);
    EXPECT_EQ(next.poses[1], cam);
    EXPECT_EQ(next.prompts.back(), "next");
    EXPECT_EQ(next.occluded_background.size(), 2u);
    EXPECT_EQ(next.occluded_background[1], c.occluded);
    EXPECT_EQ(next.cloud.background.size(), s.cloud.background.size() + c.background.size());
    for (std::size_t k = 0; k < next.cloud.background.size(); ++k) {
        const bool old = k < s.cloud.background.size();
        EXPECT_EQ(next.cloud.background.source_pose[k], old ? 0u : 1u);
        if (old) EXPECT_EQ(next.cloud.background.positions[k], s.cloud.background.positions[k]);
    }
    for (int t = 0; t < 3; ++t) {
        const auto& f = next.cloud.foreground[t];
        EXPECT_EQ(f.size(), s.cloud.foreground[t].size() + c.foreground[t].size());
        for (std::size_t k = s.cloud.foreground[t].size(); k < f.size(); ++k)
            EXPECT_EQ(f.source_pose[k], 1u);
    }
    EXPECT_EQ(s.cloud.background.positions, before.cloud.background.positions);
    EXPECT_EQ(s.poses.size(), 1u);
}

TEST(MergeUpdate, NoDoubleModelingAtNewPose) {
    // Lifting only the unseen pixels of a new pose fills that pose's view.
    const InitInput in = small_video(3, 40);
    const SceneState s = initialize_scene(in);
    RigidTransform pose;
    pose.rotation = Eigen::AngleAxisd(0.15, Eigen::Vector3d::UnitY()).toRotationMatrix();
    pose.translation = {0.3, 0.0, -0.2};
    const Camera cam = in.camera.with_pose(pose);
    const auto raster = rasterize_video(s.cloud, cam, 1);
    std::vector<RgbImage> rgb;
    std::vector<DepthMap> depth;
    std::vector<Mask> fg, obs;
    for (const auto& r : raster) {
        rgb.push_back(r.partial_rgb);
        depth.push_back(DepthMap(40, 40, 3.0));
        fg.push_back(Mask(40, 40));
        obs.push_back(r.observed);
    }
    const auto c = lift_new_content(rgb, depth, fg, obs, cam, 1);
    std::size_t unseen_any = 0;
    for (std::size_t i = 0; i < obs[0].size(); ++i) {
        bool any = false;
        for (const auto& o : obs) any = any || !o[i];
        unseen_any += any;
    }
    EXPECT_EQ(c.background.size(), unseen_any);
    const SceneState next = merge_update(s, c, cam);
    for (const auto& r : rasterize_video(next.cloud, cam, 1)) EXPECT_GE(observed_fraction(r), 0.99);
}

TEST(InterpolateDepth, MatchesBruteForce) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(1.0, 9.0);
    for (int trial = 0; trial < 6; ++trial) {
        const int w = 29 + trial, h = 21;
        DepthMap d(w, h);
        for (auto& v : d.pixels()) v = u(rng);
        const Mask valid = random_mask(w, h, trial % 2 ? 0.03 : 0.4, 200 + trial);
        const int k = 1 + 3 * trial;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                ASSERT_DOUBLE_EQ(interpolate_depth(d, valid, x, y, k),
                                 dynscene::testing::brute_idw(d, valid, x, y, k))
                    << x << "," << y;
    }
}

TEST(InterpolateDepth, MapMatchesPointwise) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(1.0, 9.0);
    for (double p : {0.001, 0.05, 0.6}) {
        const int w = 70, h = 45;
        DepthMap d(w, h);
        for (auto& v : d.pixels()) v = u(rng);
        const Mask valid = random_mask(w, h, p, 300);
        const Mask targets = random_mask(w, h, 0.5, 301);
        const DepthMap out = interpolate_depth_map(d, valid, targets);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double expect = targets(x, y) ? interpolate_depth(d, valid, x, y) : d(x, y);
                ASSERT_EQ(out(x, y), expect) << x << "," << y;
            }
    }
}

TEST(InterpolateDepth, NoValidPixelsGivesZero) {
    EXPECT_EQ(interpolate_depth(DepthMap(5, 5, 2.0), Mask(5, 5), 2, 2), 0.0);
    EXPECT_THROW(interpolate_depth(DepthMap(5, 5), Mask(5, 5), 0, 0, 0), ValidationError);
}

TEST(CompleteBackground, NothingOccludedIsNoOp) {
    const SceneState s = initialize_scene(small_video(2, 16, 0.8));
    SceneState cleared = s;
    cleared.occluded_background[0] = Mask(16, 16);
    StubOutpainter stub(StubMode::constant);
    const SceneState out = complete_background(cleared, stub, 0);
    EXPECT_EQ(out.cloud.background.positions, cleared.cloud.background.positions);
}

TEST(CompleteBackground, SingleOccludedPixelGetsOneGrayPoint) {
    const Camera cam = dynscene::testing::test_camera(8, 8, 8.0);
    InitInput in;
    in.camera = cam;
    for (int t = 0; t < 3; ++t) {
        FrameBundle f{RgbImage(8, 8, Rgb{10, 200, 30}), DepthMap(8, 8, 2.0), Mask(8, 8), t};
        f.fg_mask(3, 4) = 1;
        f.depth(3, 4) = 1.0;
        in.frames.push_back(f);
    }
    const SceneState s = initialize_scene(in);
    ASSERT_EQ(count_set(s.occluded_background[0]), 1u);
    ASSERT_EQ(s.cloud.background.size(), 63u);
    StubOutpainter stub(StubMode::constant);
    const SceneState out = complete_background(s, stub, 0);
    ASSERT_EQ(out.cloud.background.size(), 64u);
    const auto& bg = out.cloud.background;
    EXPECT_LT((bg.positions[63].cast<double>() - backproject(cam, 3, 4, 2.0)).norm(), 1e-6);
    for (int t = 0; t < 3; ++t) {
        EXPECT_EQ(bg.colors[t][63], kMidGray);
        EXPECT_EQ(bg.valid[t][63], 1);
    }
    EXPECT_EQ(bg.source_pose[63], 0u);
    EXPECT_EQ(count_set(out.occluded_background[0]), 0u);
    for (std::size_t k = 0; k < 63; ++k) EXPECT_EQ(bg.positions[k], s.cloud.background.positions[k]);
}

TEST(CompleteBackground, FillsEveryOccludedPixel) {
    const SceneState s = initialize_scene(small_video(3, 32, 0.0));
    const std::size_t occluded = count_set(s.occluded_background[0]);
    ASSERT_GT(occluded, 0u);
    StubOutpainter stub(StubMode::nearest_observed);
    const SceneState out = complete_background(s, stub, 0);
    EXPECT_EQ(out.cloud.background.size(), s.cloud.background.size() + occluded);
    for (const auto& r : rasterize_background(out.cloud.background, s.poses[0], 0))
        EXPECT_EQ(observed_fraction(r), 1.0);
}

TEST(CompleteBackground, WrongFrameCountIsDimensionMismatch) {
    struct Short final : Outpainter {
        OutpaintResult outpaint(const RayConditioningBundle& b) override {
            OutpaintResult r;
            r.frames.assign(b.frames.size() - 1, RgbImage(b.width(), b.height()));
            return r;
        }
        std::string name() const override { return "short"; }
    } shorter;
    const SceneState s = initialize_scene(small_video(3, 24, 0.0));
    EXPECT_THROW(complete_background(s, shorter, 0), DimensionMismatch);
}
