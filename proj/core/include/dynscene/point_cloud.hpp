// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/image.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace dynscene {

using Position = Eigen::Vector3f;
using PoseIndex = std::uint32_t;

// Foreground points of one timestamp.
struct PointSet {
    std::vector<Position> positions;
    std::vector<Rgb> colors;
    std::vector<PoseIndex> source_pose;

    std::size_t size() const { return positions.size(); }
    bool empty() const { return positions.empty(); }
    void reserve(std::size_t n);
    void push_back(const Position& p, const Rgb& c, PoseIndex pose);
    void append(const PointSet& other);
};

// Background points: one static position per point, one color per timestamp.
// valid[t][i] == 0 means the point was occluded at t and colors[t][i] holds a
// placeholder.
struct BackgroundLayer {
    std::vector<Position> positions;
    std::vector<PoseIndex> source_pose;
    std::vector<std::vector<Rgb>> colors;
    std::vector<std::vector<std::uint8_t>> valid;

    BackgroundLayer() = default;
    explicit BackgroundLayer(int frame_count);

    int frame_count() const { return static_cast<int>(colors.size()); }
    std::size_t size() const { return positions.size(); }
    bool empty() const { return positions.empty(); }
    // Throws ValidationError unless point_colors/point_valid have frame_count() entries.
    void push_back(const Position& p, std::span<const Rgb> point_colors,
                   std::span<const std::uint8_t> point_valid, PoseIndex pose);
    void append(const BackgroundLayer& other);
};

// Layered 4D cloud: per-timestamp foreground plus a shared background.
struct DynamicPointCloud {
    std::vector<PointSet> foreground;
    BackgroundLayer background;

    DynamicPointCloud() = default;
    explicit DynamicPointCloud(int frame_count);

    int frame_count() const { return static_cast<int>(foreground.size()); }
    std::size_t foreground_count() const;
    std::size_t total_count() const { return foreground_count() + background.size(); }

    // Throws ValidationError when the layer frame counts disagree.
    void check_consistent() const;
};

// Non-owning view of one layer of points as seen at a single timestamp.
struct PointLayerView {
    std::span<const Position> positions;
    std::span<const Rgb> colors;
    // Empty means every color is valid.
    std::span<const std::uint8_t> color_valid;
    bool foreground = false;

    std::size_t size() const { return positions.size(); }
};

// The two layers of timestamp t, foreground first.
std::vector<PointLayerView> layers_at(const DynamicPointCloud& cloud, int t);

} // namespace dynscene
