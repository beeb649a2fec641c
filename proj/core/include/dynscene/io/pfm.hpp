// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/image.hpp"

#include <filesystem>

namespace dynscene::io {

// Single-channel little-endian Portable Float Map ("Pf", scale -1.0). Rows
// are stored bottom to top as the format requires.
void write_pfm(const std::filesystem::path& path, const DepthMap& map);
// Accepts either endianness; 3-channel files are rejected.
DepthMap read_pfm(const std::filesystem::path& path);

// Writes `sentinel` wherever defined == 0.
void write_pfm_masked(const std::filesystem::path& path, const DepthMap& map, const Mask& defined,
                      float sentinel = -1.0f);

} // namespace dynscene::io
