// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Brute-force reference implementations. Deliberately naive: every routine
// is a direct loop over its definition with no acceleration or sharing.

#include "dynscene/camera.hpp"
#include "dynscene/image.hpp"
#include "dynscene/point_cloud.hpp"
#include "dynscene/rasterizer.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dynscene::testing {

// min over points of the point-to-line distance, via the same clamp.
double brute_ray_distance(std::span<const Position> points, const Eigen::Vector3d& origin,
                          const Eigen::Vector3d& dir);

DepthMap brute_ray_distance_map(std::span<const Position> points, const Camera& camera,
                                const Mask& unseen);

struct BrutePoint {
    Eigen::Vector3d position;
    Rgb color;
    bool color_valid = true;
    bool foreground = false;
};

// Every pixel scans every point; ties within kDepthTieTolerance keep the first.
RasterOutput brute_rasterize(const std::vector<BrutePoint>& points, const Camera& camera,
                             int splat_radius);

std::vector<BrutePoint> flatten(const DynamicPointCloud& cloud, int t);
std::vector<BrutePoint> flatten(const PointSet& points);

struct BruteBackgroundDepth {
    DepthMap depth;
    Mask flag;
};
BruteBackgroundDepth brute_background_depth(const std::vector<DepthMap>& depths,
                                            const std::vector<Mask>& masks);

// Closed-form 2x2 normal equations for min sum (s*e + b - r)^2.
void normal_equations_fit(const std::vector<double>& e, const std::vector<double>& r, double& s,
                          double& b);

// Sorts every valid pixel by (squared distance, index) and blends the first k.
double brute_idw(const DepthMap& depth, const Mask& valid, int x, int y, int k);

// Per-point frustum test for the training-sample oracle.
bool brute_in_frustum(const Camera& camera, const Eigen::Vector3d& p);

// Fresh empty directory under the system temp dir; removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

private:
    std::filesystem::path path_;
};

std::string file_bytes(const std::filesystem::path& path);
// Concatenated bytes of every regular file below dir, in path order.
std::string tree_bytes(const std::filesystem::path& dir);

Camera test_camera(int w = 512, int h = 512, double f = 100.0);

} // namespace dynscene::testing
