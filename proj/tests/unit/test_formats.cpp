// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/errors.hpp"
#include "dynscene/io/pfm.hpp"
#include "dynscene/io/ply.hpp"
#include "dynscene/io/png.hpp"
#include "dynscene/io/scene_io.hpp"
#include "dynscene/scene_init.hpp"
#include "dynscene/synthetic.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

using namespace dynscene;
using dynscene::testing::TempDir;
namespace fs = std::filesystem;

namespace {

void truncate_file(const fs::path& p, std::size_t keep) {
    std::string bytes = dynscene::testing::file_bytes(p);
    bytes.resize(std::min(keep, bytes.size()));
    std::ofstream(p, std::ios::binary | std::ios::trunc) << bytes;
}

SceneState sample_scene() {
    synthetic::VideoOptions o;
    o.frames = 3;
    o.width = 20;
    o.height = 16;
    SceneState s = initialize_scene(synthetic::make_video(o));
    // Mark a few colors invalid so the bitmap is exercised.
    s.cloud.background.valid[1][0] = 0;
    s.cloud.background.valid[2][5] = 0;
    s.prompts[0] = "a \"quoted\" prompt";
    s.config_json = R"({"frames":3})";
    return s;
}

} // namespace

TEST(Png, RgbRoundTrip) {
    TempDir dir("png");
    std::mt19937 rng(1);
    RgbImage img(17, 9);
    for (auto& p : img.pixels())
        p = Rgb{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                static_cast<std::uint8_t>(rng())};
    io::write_png(dir / "a.png", img);
    EXPECT_EQ(io::read_png_rgb(dir / "a.png"), img);
}

TEST(Png, MaskRoundTrip) {
    TempDir dir("mask");
    Mask m(11, 7);
    for (std::size_t i = 0; i < m.size(); i += 3) m[i] = 1;
    io::write_mask_png(dir / "m.png", m);
    EXPECT_EQ(io::read_mask_png(dir / "m.png"), m);
}

TEST(Png, CorruptAndMissingFilesAreIoErrors) {
    TempDir dir("png_bad");
    io::write_png(dir / "a.png", RgbImage(8, 8, Rgb{1, 2, 3}));
    truncate_file(dir / "a.png", 40);
    EXPECT_THROW(io::read_png_rgb(dir / "a.png"), IoError);
    std::ofstream(dir / "junk.png") << "not a png at all";
    EXPECT_THROW(io::read_png_rgb(dir / "junk.png"), IoError);
    EXPECT_THROW(io::read_png_rgb(dir / "missing.png"), IoError);
}

TEST(Pfm, RoundTripWithinFloatPrecision) {
    TempDir dir("pfm");
    DepthMap d(13, 6);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = 0.37 + 1.91 * static_cast<double>(i);
    io::write_pfm(dir / "d.pfm", d);
    const DepthMap back = io::read_pfm(dir / "d.pfm");
    ASSERT_TRUE(back.same_shape(d));
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_LE(std::abs(back[i] - d[i]), 1e-6 * d[i]);
}

TEST(Pfm, RowsStoredBottomUp) {
    TempDir dir("pfm_rows");
    DepthMap d(2, 2);
    d(0, 0) = 1.0;
    d(1, 0) = 2.0;
    d(0, 1) = 3.0;
    d(1, 1) = 4.0;
    io::write_pfm(dir / "d.pfm", d);
    const std::string bytes = dynscene::testing::file_bytes(dir / "d.pfm");
    const std::string header = "Pf\n2 2\n-1.0\n";
    ASSERT_EQ(bytes.substr(0, header.size()), header);
    float first = 0.0f;
    std::memcpy(&first, bytes.data() + header.size(), 4);
    EXPECT_EQ(first, 3.0f);
}

TEST(Pfm, ReadsBigEndian) {
    TempDir dir("pfm_be");
    {
        std::ofstream out(dir / "be.pfm", std::ios::binary);
        out << "Pf\n2 1\n1.0\n";
        for (float v : {1.5f, -2.25f}) {
            unsigned char b[4];
            std::memcpy(b, &v, 4);
            out.put(static_cast<char>(b[3])).put(static_cast<char>(b[2]));
            out.put(static_cast<char>(b[1])).put(static_cast<char>(b[0]));
        }
    }
    const DepthMap d = io::read_pfm(dir / "be.pfm");
    ASSERT_EQ(d.width(), 2);
    EXPECT_EQ(d(0, 0), 1.5);
    EXPECT_EQ(d(1, 0), -2.25);
}

TEST(Pfm, RejectsColorAndTruncated) {
    TempDir dir("pfm_bad");
    std::ofstream(dir / "c.pfm", std::ios::binary) << "PF\n1 1\n-1.0\n" << std::string(12, '\0');
    EXPECT_THROW(io::read_pfm(dir / "c.pfm"), IoError);
    io::write_pfm(dir / "t.pfm", DepthMap(10, 10, 1.0));
    truncate_file(dir / "t.pfm", 100);
    EXPECT_THROW(io::read_pfm(dir / "t.pfm"), IoError);
}

TEST(Ply, TableRoundTrip) {
    TempDir dir("ply");
    io::PlyTable t({{"x", io::PlyType::float32}, {"n", io::PlyType::uint32}, {"c", io::PlyType::uint8}}, 5);
    for (std::size_t r = 0; r < 5; ++r) {
        t.set(r, 0, static_cast<float>(r) * 0.5f);
        t.set(r, 1, static_cast<std::uint32_t>(r * 1000));
        t.set(r, 2, static_cast<std::uint8_t>(250 + r));
    }
    io::write_ply(dir / "t.ply", t, {"hello"});
    const auto back = io::read_ply(dir / "t.ply");
    ASSERT_EQ(back.rows(), 5u);
    EXPECT_EQ(back.bytes(), t.bytes());
    EXPECT_EQ(back.get(3, back.column("n")), 3000.0);
    EXPECT_THROW(back.column("missing"), IoError);
    truncate_file(dir / "t.ply", dynscene::testing::file_bytes(dir / "t.ply").size() - 3);
    EXPECT_THROW(io::read_ply(dir / "t.ply"), IoError);
}

TEST(BackgroundBin, RoundTripAndTrailingBytes) {
    TempDir dir("bgbin");
    const SceneState s = sample_scene();
    io::write_background_layer(dir / "bg.bin", s.cloud.background);
    const auto back = io::read_background_layer(dir / "bg.bin");
    EXPECT_EQ(back.positions, s.cloud.background.positions);
    EXPECT_EQ(back.source_pose, s.cloud.background.source_pose);
    EXPECT_EQ(back.colors, s.cloud.background.colors);
    EXPECT_EQ(back.valid, s.cloud.background.valid);
    std::ofstream(dir / "bg.bin", std::ios::binary | std::ios::app) << 'x';
    EXPECT_THROW(io::read_background_layer(dir / "bg.bin"), IoError);
    truncate_file(dir / "bg.bin", 30);
    EXPECT_THROW(io::read_background_layer(dir / "bg.bin"), IoError);
}

TEST(SceneDir, RoundTrip) {
    TempDir dir("scene");
    const SceneState s = sample_scene();
    io::write_scene(dir / "scene", s);
    for (int t = 0; t < 3; ++t) EXPECT_TRUE(fs::exists(dir / ("scene/frame_00" + std::to_string(t) + ".ply")));
    EXPECT_TRUE(fs::exists(dir / "scene/occluded_000.png"));
    const SceneState back = io::read_scene(dir / "scene");
    ASSERT_EQ(back.frame_count(), 3);
    for (int t = 0; t < 3; ++t) {
        EXPECT_EQ(back.cloud.foreground[t].positions, s.cloud.foreground[t].positions);
        EXPECT_EQ(back.cloud.foreground[t].colors, s.cloud.foreground[t].colors);
        EXPECT_EQ(back.cloud.foreground[t].source_pose, s.cloud.foreground[t].source_pose);
    }
    EXPECT_EQ(back.cloud.background.positions, s.cloud.background.positions);
    EXPECT_EQ(back.cloud.background.valid, s.cloud.background.valid);
    EXPECT_EQ(back.poses, s.poses);
    EXPECT_EQ(back.prompts, s.prompts);
    EXPECT_EQ(back.occluded_background, s.occluded_background);
    EXPECT_EQ(back.config_json, s.config_json);
}

TEST(SceneDir, PlyRowsCarryLayers) {
    TempDir dir("scene_ply");
    const SceneState s = sample_scene();
    io::write_scene(dir / "scene", s);
    const auto t = io::read_ply(dir / "scene/frame_002.ply");
    ASSERT_EQ(t.rows(), s.cloud.foreground[2].size() + s.cloud.background.size());
    const std::size_t layer = t.column("layer"), valid = t.column("valid");
    const std::size_t nfg = s.cloud.foreground[2].size();
    for (std::size_t r = 0; r < t.rows(); ++r) {
        EXPECT_EQ(t.get(r, layer), r < nfg ? 1.0 : 0.0);
        if (r == nfg + 5) EXPECT_EQ(t.get(r, valid), 0.0);
    }
}

TEST(SceneDir, MissingOrCorruptIsIoError) {
    TempDir dir("scene_bad");
    EXPECT_THROW(io::read_scene(dir / "nope"), IoError);
    io::write_scene(dir / "scene", sample_scene());
    io::write_text(dir / "scene/state.json", "{ broken");
    EXPECT_THROW(io::read_scene(dir / "scene"), IoError);
    io::write_scene(dir / "scene2", sample_scene());
    fs::remove(dir / "scene2/frame_001.ply");
    EXPECT_THROW(io::read_scene(dir / "scene2"), IoError);
}

TEST(SceneDir, AtomicWriteReplacesWholeDirectory) {
    TempDir dir("scene_atomic");
    SceneState s = sample_scene();
    io::write_scene_atomic(dir / "scene", s);
    io::write_text(dir / "scene/stray.txt", "x");
    s.prompts[0] = "second";
    io::write_scene_atomic(dir / "scene", s);
    EXPECT_FALSE(fs::exists(dir / "scene/stray.txt"));
    EXPECT_FALSE(fs::exists(dir / "scene.staging"));
    EXPECT_FALSE(fs::exists(dir / "scene.retired"));
    EXPECT_EQ(io::read_scene(dir / "scene").prompts[0], "second");
}

TEST(CameraJson, RoundTripIsExact) {
    RigidTransform pose;
    pose.rotation = Eigen::AngleAxisd(0.123456789, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    pose.translation = {0.1, 1e-17, -3.3};
    const Camera c = dynscene::testing::test_camera(64, 32, 41.5).with_pose(pose);
    EXPECT_EQ(io::camera_from_json(io::camera_to_json(c)), c);
    TempDir dir("cams");
    io::write_cameras(dir / "c.json", {c, c.with_pose(RigidTransform::identity())});
    const auto back = io::read_cameras(dir / "c.json");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0], c);
}

TEST(CameraJson, RejectsBadInput) {
    EXPECT_THROW(io::camera_from_json("[1,2]"), Error);
    EXPECT_THROW(io::camera_from_json(R"({"fx":1})"), Error);
    EXPECT_THROW(io::camera_from_json("{"), Error);
}
