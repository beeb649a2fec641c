// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/camera.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace dynscene {

enum class TrajectoryKind { translate_line, rotate, composite };

struct TrajectorySpec {
    TrajectoryKind kind = TrajectoryKind::translate_line;
    int n_steps = 1;
    // translate_line: camera-frame direction and distance per step.
    Eigen::Vector3d direction{0.0, 0.0, -1.0};
    double step_translation = 0.0005;
    // rotate: camera-frame axis through the camera center.
    Eigen::Vector3d axis{0.0, 1.0, 0.0};
    double rotation = 0.45;
    // When true, `rotation` is the angle of the whole segment and each step
    // turns rotation / n_steps; otherwise each step turns `rotation`.
    bool rotation_is_total = true;
    // composite: segments run back to back.
    std::vector<TrajectorySpec> segments;
};

// Per-step transform in the camera frame; pose k = pose(k-1) * step.
RigidTransform step_transform(const TrajectorySpec& spec);

// Poses 1..n_steps after `start` (start itself is not included). Intrinsics
// are copied from start. Throws ValidationError for zero-length directions or
// axes and n_steps < 1.
std::vector<Camera> generate(const TrajectorySpec& spec, const Camera& start);

// Angle of a rotation matrix in radians.
double rotation_angle(const Eigen::Matrix3d& rotation);

} // namespace dynscene
