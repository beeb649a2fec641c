// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <optional>

namespace dynscene {

struct Intrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

// Rigid transform x -> rotation * x + translation.
struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    static RigidTransform identity() { return {}; }
    static RigidTransform from_matrix(const Eigen::Matrix4d& m);

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
    RigidTransform inverse() const;
    // (this * other)(p) == this->apply(other.apply(p))
    RigidTransform operator*(const RigidTransform& other) const;
    Eigen::Matrix4d matrix() const;

    friend bool operator==(const RigidTransform& a, const RigidTransform& b) {
        return a.rotation == b.rotation && a.translation == b.translation;
    }
};

// True when R is orthonormal with det +1 to within tol.
bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-6);

// Pinhole camera with a camera-to-world pose. Camera frame: x right, y down,
// +Z forward; depth is the camera-frame z coordinate.
class Camera {
public:
    Camera() = default;
    // Throws ValidationError if the intrinsics or rotation are invalid.
    Camera(const Intrinsics& intrinsics, const RigidTransform& camera_to_world);

    const Intrinsics& intrinsics() const { return intrinsics_; }
    const RigidTransform& pose() const { return camera_to_world_; }
    const RigidTransform& world_to_camera() const { return world_to_camera_; }
    int width() const { return intrinsics_.width; }
    int height() const { return intrinsics_.height; }

    Eigen::Vector3d center() const { return camera_to_world_.translation; }

    Camera with_pose(const RigidTransform& camera_to_world) const {
        return Camera(intrinsics_, camera_to_world);
    }

    // Unit ray direction through pixel (x, y), in the world frame.
    Eigen::Vector3d ray_direction(double x, double y) const;

    friend bool operator==(const Camera& a, const Camera& b) {
        return a.intrinsics_ == b.intrinsics_ && a.camera_to_world_ == b.camera_to_world_;
    }

private:
    Intrinsics intrinsics_;
    RigidTransform camera_to_world_;
    RigidTransform world_to_camera_;
};

struct PixelProjection {
    double x = 0.0;
    double y = 0.0;
    double depth = 0.0;
};

// Projects a world point. Returns nullopt when the camera-frame z <= 0.
std::optional<PixelProjection> project(const Camera& camera, const Eigen::Vector3d& world_point);

// Lifts pixel (x, y) at plane depth `depth` to the world frame. Throws
// ValidationError for non-positive or non-finite depth, or pixels outside
// [-0.5, size - 0.5).
Eigen::Vector3d backproject(const Camera& camera, double x, double y, double depth);

// Nearest pixel to a continuous image coordinate.
inline int pixel_index(double v) { return static_cast<int>(std::floor(v + 0.5)); }

} // namespace dynscene
