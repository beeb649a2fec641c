// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/outpaint_bridge.hpp"

#include <filesystem>
#include <string>

namespace dynscene::io {

inline constexpr int kBundleFormatVersion = 1;

// Exchange layout, relative to the bundle directory:
//   manifest.json                 N, h, w, prompt, camera, format_version
//   frame_{t:03}_rgb.png          unseen pixels zeroed
//   frame_{t:03}_mask.png         255 = observed
//   frame_{t:03}_raydepth.pfm     -1 where unobserved
//   frame_{t:03}_raydist.pfm      -1 on observed pixels
//   frame_{t:03}_invalid.png      255 = background color unknown at t
// manifest.json is written last, through a rename.
void write_bundle(const std::filesystem::path& dir, const RayConditioningBundle& bundle);
RayConditioningBundle read_bundle(const std::filesystem::path& dir);

// Outpainter reply: manifest.json (format_version, N, h, w, provenance) and
// frame_{t:03}_rgb.png; optional frame_{t:03}_depth.pfm and
// frame_{t:03}_fgmask.png. Throws MalformedResult / DimensionMismatch.
void write_result(const std::filesystem::path& dir, const OutpaintResult& result, int width,
                  int height);
OutpaintResult read_result(const std::filesystem::path& dir, int expected_frames,
                           int expected_width, int expected_height);

std::string frame_name(int t, const std::string& suffix);

} // namespace dynscene::io
