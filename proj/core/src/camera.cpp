// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/camera.hpp"

#include "dynscene/errors.hpp"

#include <cmath>
#include <sstream>

namespace dynscene {

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m) {
    RigidTransform t;
    t.rotation = m.topLeftCorner<3, 3>();
    t.translation = m.topRightCorner<3, 1>();
    return t;
}

RigidTransform RigidTransform::inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
    RigidTransform out;
    out.rotation = rotation * other.rotation;
    out.translation = rotation * other.translation + translation;
    return out;
}

Eigen::Matrix4d RigidTransform::matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
}

bool is_rotation(const Eigen::Matrix3d& r, double tol) {
    if (!r.allFinite()) return false;
    const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

Camera::Camera(const Intrinsics& intrinsics, const RigidTransform& camera_to_world)
    : intrinsics_(intrinsics), camera_to_world_(camera_to_world) {
    const auto& k = intrinsics_;
    std::ostringstream why;
    if (!(k.fx > 0.0) || !(k.fy > 0.0) || !std::isfinite(k.fx) || !std::isfinite(k.fy)) {
        why << "focal lengths must be positive (fx=" << k.fx << ", fy=" << k.fy << ")";
    } else if (k.width <= 0 || k.height <= 0) {
        why << "image size must be positive (" << k.width << "x" << k.height << ")";
    } else if (!(k.cx >= 0.0 && k.cx < k.width && k.cy >= 0.0 && k.cy < k.height)) {
        why << "principal point (" << k.cx << ", " << k.cy << ") outside the image";
    } else if (!is_rotation(camera_to_world.rotation, 1e-6)) {
        why << "pose rotation is not orthonormal with determinant +1";
    } else if (!camera_to_world.translation.allFinite()) {
        why << "pose translation is not finite";
    }
    if (!why.str().empty()) throw ValidationError("invalid camera: " + why.str());
    world_to_camera_ = camera_to_world_.inverse();
}

Eigen::Vector3d Camera::ray_direction(double x, double y) const {
    const Eigen::Vector3d local((x - intrinsics_.cx) / intrinsics_.fx,
                                (y - intrinsics_.cy) / intrinsics_.fy, 1.0);
    return camera_to_world_.rotation * local.normalized();
}

std::optional<PixelProjection> project(const Camera& camera, const Eigen::Vector3d& world_point) {
    const Eigen::Vector3d p = camera.world_to_camera().apply(world_point);
    if (!(p.z() > 0.0)) return std::nullopt;
    const auto& k = camera.intrinsics();
    return PixelProjection{k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy, p.z()};
}

Eigen::Vector3d backproject(const Camera& camera, double x, double y, double depth) {
    if (!(depth > 0.0) || !std::isfinite(depth)) {
        throw ValidationError("backproject: depth must be positive and finite, got " +
                              std::to_string(depth));
    }
    const auto& k = camera.intrinsics();
    if (!(x >= -0.5 && x < k.width - 0.5 && y >= -0.5 && y < k.height - 0.5)) {
        throw ValidationError("backproject: pixel (" + std::to_string(x) + ", " +
                              std::to_string(y) + ") outside the image");
    }
    const Eigen::Vector3d local((x - k.cx) * depth / k.fx, (y - k.cy) * depth / k.fy, depth);
    return camera.pose().apply(local);
}

} // namespace dynscene
