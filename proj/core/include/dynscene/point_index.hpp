// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/point_cloud.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace dynscene {

// max(0, |p-o|^2 - (r.(p-o))^2) for unit r. Every distance in the library,
// accelerated or not, goes through this expression.
inline double point_line_squared(const Eigen::Vector3d& origin, const Eigen::Vector3d& direction,
                                 const Position& p) {
    const Eigen::Vector3d rel = p.cast<double>() - origin;
    const double along = direction.dot(rel);
    const double d = rel.squaredNorm() - along * along;
    return d > 0.0 ? d : 0.0;
}

struct IndexParams {
    // Maximum points in a leaf cell before it is subdivided.
    std::uint32_t leaf_size = 16;
    // Finest grid level; cells at depth max_depth have extent bbox / 2^max_depth.
    int max_depth = 20;
};

// Sparse hierarchical voxel grid over a point set, answering "smallest
// point-to-line distance" queries exactly. Cells are visited best-first by
// the line distance to their bounding spheres.
class PointIndex {
public:
    // Throws ValidationError on an empty point set.
    explicit PointIndex(std::span<const Position> points, const IndexParams& params = {});

    std::size_t size() const { return points_.size(); }
    const IndexParams& params() const { return params_; }

    // Minimum over points p of max(0, |p-o|^2 - (r.(p-o))^2), r unit length.
    // Identical to the brute-force value over the same points.
    double min_squared_line_distance(const Eigen::Vector3d& origin,
                                     const Eigen::Vector3d& direction) const;

    double min_line_distance(const Eigen::Vector3d& origin, const Eigen::Vector3d& direction) const;

    struct QueryStats {
        std::size_t nodes_visited = 0;
        std::size_t points_tested = 0;
    };
    double min_squared_line_distance(const Eigen::Vector3d& origin,
                                     const Eigen::Vector3d& direction, QueryStats& stats) const;

    // Closest point to the line among those strictly closer than upper_bound
    // (squared). found is false when no point beats the bound.
    struct LineHit {
        double squared_distance = 0.0;
        Position point = Position::Zero();
        bool found = false;
    };
    LineHit closest_to_line(const Eigen::Vector3d& origin, const Eigen::Vector3d& direction,
                            double upper_bound, QueryStats* stats = nullptr) const;

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Eigen::Vector3d lo;
        Eigen::Vector3d hi;
        Eigen::Vector3d center = Eigen::Vector3d::Zero();
        double radius = 0.0;
        std::uint32_t begin = 0;  // point range for leaves, child range otherwise
        std::uint32_t end = 0;
        bool leaf = true;
    };

    void build_node(std::span<const std::uint64_t> codes, std::uint32_t slot, std::uint32_t begin,
                    std::uint32_t end, int level);

    IndexParams params_;
    std::vector<Position> points_;  // sorted by Morton code
    std::vector<Node> nodes_;       // nodes_[0] is the root
};

PointIndex build_index(std::span<const Position> points, const IndexParams& params = {});

// Lower bound on the squared distance from the line {origin + t*direction}
// to any point of the ball (center, radius). Exact for radius 0 up to padding.
double line_sphere_lower_bound(const Eigen::Vector3d& origin, const Eigen::Vector3d& direction,
                               const Eigen::Vector3d& center, double radius);

} // namespace dynscene
