// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/image.hpp"

#include <filesystem>

namespace dynscene::io {

// 8-bit PNG. Readers accept gray, gray+alpha, RGB, RGBA, palette and 16-bit
// inputs and convert. Errors throw IoError naming the file.
void write_png(const std::filesystem::path& path, const RgbImage& image);
RgbImage read_png_rgb(const std::filesystem::path& path);

// Gray 8-bit; nonzero mask values are written as 255.
void write_mask_png(const std::filesystem::path& path, const Mask& mask);
// Gray values >= 128 become 1.
Mask read_mask_png(const std::filesystem::path& path);

} // namespace dynscene::io
