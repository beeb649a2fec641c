// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dynscene {

// Runtime self-check: brute-force references against the accelerated paths
// plus round-trip properties, on randomly generated scenes.
struct OracleConfig {
    int seeds = 5;
    std::vector<std::size_t> point_counts{1000, 10000, 100000};
    int ray_grid = 64;
    int raster_size = 64;
    std::size_t raster_points = 10000;
    int video_size = 128;
    int video_frames = 4;
};

struct OracleViolation {
    std::string check;
    std::uint64_t seed = 0;
    std::string detail;
};

struct OracleReport {
    std::vector<std::string> passed;
    std::vector<OracleViolation> violations;
    bool ok() const { return violations.empty(); }
};

OracleReport run_oracle(const OracleConfig& config, std::uint64_t base_seed);

} // namespace dynscene
