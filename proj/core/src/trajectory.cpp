// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/trajectory.hpp"

#include "dynscene/errors.hpp"

#include <cmath>
#include <string>

namespace dynscene {
namespace {

void check_spec(const TrajectorySpec& spec) {
    if (spec.kind == TrajectoryKind::composite) {
        if (spec.segments.empty()) throw ValidationError("composite trajectory has no segments");
        return;
    }
    if (spec.n_steps < 1) {
        throw ValidationError("trajectory n_steps must be >= 1, got " + std::to_string(spec.n_steps));
    }
    if (spec.kind == TrajectoryKind::translate_line) {
        if (!spec.direction.allFinite() || spec.direction.norm() == 0.0) {
            throw ValidationError("trajectory direction must be a non-zero finite vector");
        }
        if (!std::isfinite(spec.step_translation)) {
            throw ValidationError("trajectory step_translation must be finite");
        }
    } else {
        if (!spec.axis.allFinite() || spec.axis.norm() == 0.0) {
            throw ValidationError("trajectory rotation axis must be a non-zero finite vector");
        }
        if (!std::isfinite(spec.rotation)) throw ValidationError("trajectory rotation must be finite");
    }
}

double step_angle(const TrajectorySpec& spec) {
    return spec.rotation_is_total ? spec.rotation / spec.n_steps : spec.rotation;
}

} // namespace

RigidTransform step_transform(const TrajectorySpec& spec) {
    check_spec(spec);
    RigidTransform step;
    switch (spec.kind) {
    case TrajectoryKind::translate_line:
        step.translation = spec.direction.normalized() * spec.step_translation;
        break;
    case TrajectoryKind::rotate:
        step.rotation =
            Eigen::AngleAxisd(step_angle(spec), spec.axis.normalized()).toRotationMatrix();
        break;
    case TrajectoryKind::composite:
        throw ValidationError("a composite trajectory has no single step transform");
    }
    return step;
}

std::vector<Camera> generate(const TrajectorySpec& spec, const Camera& start) {
    check_spec(spec);
    std::vector<Camera> poses;
    if (spec.kind == TrajectoryKind::composite) {
        Camera current = start;
        for (const auto& segment : spec.segments) {
            auto part = generate(segment, current);
            if (!part.empty()) current = part.back();
            poses.insert(poses.end(), part.begin(), part.end());
        }
        return poses;
    }

    const RigidTransform step = step_transform(spec);
    const bool rotates = spec.kind == TrajectoryKind::rotate && step_angle(spec) != 0.0;
    const Eigen::Quaterniond step_q(step.rotation);
    Eigen::Quaterniond q(start.pose().rotation);
    RigidTransform pose = start.pose();
    poses.reserve(static_cast<std::size_t>(spec.n_steps));
    for (int k = 1; k <= spec.n_steps; ++k) {
        // Quaternion composition keeps the rotation orthonormal over long chains.
        pose.translation = pose.rotation * step.translation + pose.translation;
        if (rotates) {
            q = (q * step_q).normalized();
            pose.rotation = q.toRotationMatrix();
        }
        poses.push_back(start.with_pose(pose));
    }
    return poses;
}

double rotation_angle(const Eigen::Matrix3d& r) {
    const Eigen::Vector3d axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    return std::atan2(0.5 * axis.norm(), 0.5 * (r.trace() - 1.0));
}

} // namespace dynscene
