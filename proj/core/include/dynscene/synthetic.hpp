// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/camera.hpp"
#include "dynscene/point_cloud.hpp"
#include "dynscene/scene_init.hpp"

#include <cstdint>
#include <vector>

namespace dynscene::synthetic {

enum class Background {
    plane,        // fronto-parallel plane at base_depth
    tilted_plane, // plane tilted about the y axis
    wavy          // sinusoidal relief around base_depth
};

struct VideoOptions {
    int frames = 16;
    int width = 512;
    int height = 512;
    Background background = Background::wavy;
    double base_depth = 4.0;
    // Foreground sphere; radius 0 disables it.
    double sphere_radius = 0.6;
    double sphere_depth = 2.5;
    // Sphere center sweeps this far along x over the clip (world units).
    double sphere_travel = 0.8;
    std::uint64_t seed = 0;
};

// Camera at the world origin looking down +Z with ~53 degree horizontal FOV.
Camera default_camera(int width, int height);

// Procedural fixed-pose RGB-D video with a moving sphere in front of a
// background whose colors drift over time. Masks mark the sphere.
InitInput make_video(const VideoOptions& options);

// n points uniform in the axis-aligned box [lo, hi].
std::vector<Position> uniform_points(std::size_t n, const Eigen::Vector3d& lo,
                                     const Eigen::Vector3d& hi, std::uint64_t seed);

} // namespace dynscene::synthetic
