// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/point_cloud.hpp"

#include "dynscene/errors.hpp"

#include <string>

namespace dynscene {

void PointSet::reserve(std::size_t n) {
    positions.reserve(n);
    colors.reserve(n);
    source_pose.reserve(n);
}

void PointSet::push_back(const Position& p, const Rgb& c, PoseIndex pose) {
    positions.push_back(p);
    colors.push_back(c);
    source_pose.push_back(pose);
}

void PointSet::append(const PointSet& other) {
    positions.insert(positions.end(), other.positions.begin(), other.positions.end());
    colors.insert(colors.end(), other.colors.begin(), other.colors.end());
    source_pose.insert(source_pose.end(), other.source_pose.begin(), other.source_pose.end());
}

BackgroundLayer::BackgroundLayer(int frame_count)
    : colors(static_cast<std::size_t>(frame_count)), valid(static_cast<std::size_t>(frame_count)) {}

void BackgroundLayer::push_back(const Position& p, std::span<const Rgb> point_colors,
                                std::span<const std::uint8_t> point_valid, PoseIndex pose) {
    const auto n = static_cast<std::size_t>(frame_count());
    if (point_colors.size() != n || point_valid.size() != n) {
        throw ValidationError("background point needs " + std::to_string(n) +
                              " colors and validity flags");
    }
    positions.push_back(p);
    source_pose.push_back(pose);
    for (std::size_t t = 0; t < n; ++t) {
        colors[t].push_back(point_colors[t]);
        valid[t].push_back(point_valid[t] ? 1 : 0);
    }
}

void BackgroundLayer::append(const BackgroundLayer& other) {
    if (other.frame_count() != frame_count()) {
        throw ValidationError("background layers have different frame counts (" +
                              std::to_string(frame_count()) + " vs " +
                              std::to_string(other.frame_count()) + ")");
    }
    positions.insert(positions.end(), other.positions.begin(), other.positions.end());
    source_pose.insert(source_pose.end(), other.source_pose.begin(), other.source_pose.end());
    for (std::size_t t = 0; t < colors.size(); ++t) {
        colors[t].insert(colors[t].end(), other.colors[t].begin(), other.colors[t].end());
        valid[t].insert(valid[t].end(), other.valid[t].begin(), other.valid[t].end());
    }
}

DynamicPointCloud::DynamicPointCloud(int frame_count)
    : foreground(static_cast<std::size_t>(frame_count)), background(frame_count) {}

std::size_t DynamicPointCloud::foreground_count() const {
    std::size_t n = 0;
    for (const auto& f : foreground) n += f.size();
    return n;
}

void DynamicPointCloud::check_consistent() const {
    if (background.frame_count() != frame_count()) {
        throw ValidationError("cloud has " + std::to_string(frame_count()) +
                              " foreground timestamps but background colors for " +
                              std::to_string(background.frame_count()));
    }
    for (const auto& f : foreground) {
        if (f.colors.size() != f.size() || f.source_pose.size() != f.size())
            throw ValidationError("foreground point set has ragged attributes");
    }
    for (int t = 0; t < background.frame_count(); ++t) {
        if (background.colors[t].size() != background.size() ||
            background.valid[t].size() != background.size())
            throw ValidationError("background colors at t=" + std::to_string(t) +
                                  " do not match the point count");
    }
    if (background.source_pose.size() != background.size())
        throw ValidationError("background pose tags do not match the point count");
}

std::vector<PointLayerView> layers_at(const DynamicPointCloud& cloud, int t) {
    std::vector<PointLayerView> layers;
    const auto& fg = cloud.foreground.at(static_cast<std::size_t>(t));
    layers.push_back({fg.positions, fg.colors, {}, true});
    const auto& bg = cloud.background;
    layers.push_back({bg.positions, bg.colors.at(static_cast<std::size_t>(t)),
                      bg.valid.at(static_cast<std::size_t>(t)), false});
    return layers;
}

} // namespace dynscene
