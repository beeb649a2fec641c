// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/camera.hpp"
#include "dynscene/point_cloud.hpp"
#include "dynscene/scene_state.hpp"
#include "dynscene/trajectory.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace dynscene::io {

inline constexpr int kSceneFormatVersion = 1;

// Scene directory layout:
//   state.json              manifest (version, N, h, w, poses, prompts, counts, config)
//   frame_{t:03}.ply        foreground(t) followed by the background with colors[t]
//   background.bin          background layer: positions, pose tags, per-timestamp
//                           color blocks and validity bitmaps
//   occluded_{i:03}.png     never-observed background at pose i
void write_scene(const std::filesystem::path& dir, const SceneState& scene);
SceneState read_scene(const std::filesystem::path& dir);

// Writes into a sibling temporary directory and swaps it in, so readers see
// either the old or the new state.
void write_scene_atomic(const std::filesystem::path& dir, const SceneState& scene);

void write_background_layer(const std::filesystem::path& path, const BackgroundLayer& layer);
BackgroundLayer read_background_layer(const std::filesystem::path& path);

// Camera JSON: {fx, fy, cx, cy, width, height, camera_to_world: [16, row-major]}.
std::string camera_to_json(const Camera& camera);
Camera camera_from_json(const std::string& text);
void write_camera(const std::filesystem::path& path, const Camera& camera);
Camera read_camera(const std::filesystem::path& path);
// {"cameras": [camera, ...]}
void write_cameras(const std::filesystem::path& path, const std::vector<Camera>& cameras);
std::vector<Camera> read_cameras(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace dynscene::io
