// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/point_index.hpp"

#include "dynscene/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

namespace dynscene {
namespace {

constexpr int kMaxDepth = 21;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Slack on the pruning bound so that rounding in the per-point formula can
// never let the accelerated result differ from brute force.
constexpr double kPruneSlack = 64.0 * std::numeric_limits<double>::epsilon();

std::uint64_t spread_bits(std::uint64_t v) {
    v &= 0x1fffff;
    v = (v | v << 32) & 0x1f00000000ffffULL;
    v = (v | v << 16) & 0x1f0000ff0000ffULL;
    v = (v | v << 8) & 0x100f00f00f00f00fULL;
    v = (v | v << 4) & 0x10c30c30c30c30c3ULL;
    v = (v | v << 2) & 0x1249249249249249ULL;
    return v;
}

std::uint64_t morton(std::uint64_t x, std::uint64_t y, std::uint64_t z) {
    return spread_bits(x) << 2 | spread_bits(y) << 1 | spread_bits(z);
}

// Squared distance from origin to the farthest box corner.
inline double far_corner_squared(const Eigen::Vector3d& origin, const Eigen::Vector3d& lo,
                                 const Eigen::Vector3d& hi) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double a = lo[i] - origin[i];
        const double b = hi[i] - origin[i];
        s += std::max(a * a, b * b);
    }
    return s;
}

} // namespace

double line_sphere_lower_bound(const Eigen::Vector3d& origin, const Eigen::Vector3d& direction,
                               const Eigen::Vector3d& center, double radius) {
    const Eigen::Vector3d rel = center - origin;
    const double along = direction.dot(rel);
    const double q = std::max(0.0, rel.squaredNorm() - along * along);
    // Padding keeps rounding from lifting the bound above the exact value.
    const double gap = std::sqrt(q) - radius * (1.0 + 1e-9) - 1e-9 * std::sqrt(rel.squaredNorm());
    return gap > 0.0 ? gap * gap : 0.0;
}

PointIndex::PointIndex(std::span<const Position> points, const IndexParams& params)
    : params_(params) {
    if (points.empty()) throw ValidationError("build_index: empty point set");
    if (params_.leaf_size == 0) throw ValidationError("build_index: leaf_size must be >= 1");
    if (params_.max_depth < 0 || params_.max_depth > kMaxDepth) {
        throw ValidationError("build_index: max_depth must be in [0, 21]");
    }
    for (const auto& p : points) {
        if (!p.allFinite()) throw ValidationError("build_index: non-finite point");
    }

    Eigen::Vector3d lo = Eigen::Vector3d::Constant(kInf);
    Eigen::Vector3d hi = Eigen::Vector3d::Constant(-kInf);
    for (const auto& p : points) {
        lo = lo.cwiseMin(p.cast<double>());
        hi = hi.cwiseMax(p.cast<double>());
    }
    double extent = (hi - lo).maxCoeff();
    if (!(extent > 0.0)) extent = 1.0;
    const auto cells = static_cast<double>(std::uint64_t{1} << params_.max_depth);
    const double scale = cells / extent;
    const auto max_cell = static_cast<std::uint64_t>(cells) - 1;

    const std::size_t n = points.size();
    std::vector<std::uint64_t> codes(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::array<std::uint64_t, 3> q{};
        for (int a = 0; a < 3; ++a) {
            const double c = std::floor((points[i][a] - lo[a]) * scale);
            q[a] = std::min(max_cell, static_cast<std::uint64_t>(std::max(0.0, c)));
        }
        codes[i] = morton(q[0], q[1], q[2]);
    }
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return codes[a] < codes[b]; });
    points_.resize(n);
    std::vector<std::uint64_t> sorted(n);
    for (std::size_t i = 0; i < n; ++i) {
        points_[i] = points[order[i]];
        sorted[i] = codes[order[i]];
    }
    nodes_.emplace_back();
    build_node(sorted, 0, 0, static_cast<std::uint32_t>(n), 0);
}

void PointIndex::build_node(std::span<const std::uint64_t> codes, std::uint32_t slot,
                            std::uint32_t begin, std::uint32_t end, int level) {
    const bool leaf = end - begin <= params_.leaf_size || level >= params_.max_depth;
    if (leaf) {
        Eigen::Vector3d lo = Eigen::Vector3d::Constant(kInf);
        Eigen::Vector3d hi = Eigen::Vector3d::Constant(-kInf);
        for (std::uint32_t i = begin; i < end; ++i) {
            lo = lo.cwiseMin(points_[i].cast<double>());
            hi = hi.cwiseMax(points_[i].cast<double>());
        }
        nodes_[slot] = Node{lo, hi, 0.5 * (lo + hi), 0.5 * (hi - lo).norm(), begin, end, true};
        return;
    }
    // Split on the next octant digit; codes are sorted so octants are runs.
    const int shift = 3 * (params_.max_depth - 1 - level);
    std::array<std::pair<std::uint32_t, std::uint32_t>, 8> runs{};
    int count = 0;
    std::uint32_t run_begin = begin;
    for (std::uint32_t i = begin + 1; i <= end; ++i) {
        if (i == end || ((codes[i] >> shift) & 7) != ((codes[run_begin] >> shift) & 7)) {
            runs[count++] = {run_begin, i};
            run_begin = i;
        }
    }
    if (count == 1) {
        // Every point falls in one octant; descend without creating a node.
        build_node(codes, slot, begin, end, level + 1);
        return;
    }
    const auto first = static_cast<std::uint32_t>(nodes_.size());
    nodes_.resize(nodes_.size() + static_cast<std::size_t>(count));
    for (int c = 0; c < count; ++c) {
        build_node(codes, first + static_cast<std::uint32_t>(c), runs[c].first, runs[c].second,
                   level + 1);
    }
    Eigen::Vector3d lo = Eigen::Vector3d::Constant(kInf);
    Eigen::Vector3d hi = Eigen::Vector3d::Constant(-kInf);
    for (int c = 0; c < count; ++c) {
        lo = lo.cwiseMin(nodes_[first + c].lo);
        hi = hi.cwiseMax(nodes_[first + c].hi);
    }
    nodes_[slot] = Node{lo,    hi,    0.5 * (lo + hi), 0.5 * (hi - lo).norm(),
                        first, first + static_cast<std::uint32_t>(count), false};
}

double PointIndex::min_squared_line_distance(const Eigen::Vector3d& origin,
                                             const Eigen::Vector3d& direction) const {
    QueryStats stats;
    return min_squared_line_distance(origin, direction, stats);
}

double PointIndex::min_line_distance(const Eigen::Vector3d& origin,
                                     const Eigen::Vector3d& direction) const {
    return std::sqrt(min_squared_line_distance(origin, direction));
}

double PointIndex::min_squared_line_distance(const Eigen::Vector3d& origin,
                                             const Eigen::Vector3d& direction,
                                             QueryStats& stats) const {
    // Every point beats an infinite bound, so a hit is always found.
    return closest_to_line(origin, direction, kInf, &stats).squared_distance;
}

PointIndex::LineHit PointIndex::closest_to_line(const Eigen::Vector3d& origin,
                                                const Eigen::Vector3d& direction,
                                                double upper_bound, QueryStats* stats) const {
    auto slack = [&](const Node& node) {
        return kPruneSlack * far_corner_squared(origin, node.lo, node.hi);
    };
    using Entry = std::pair<double, std::uint32_t>;
    // Min-heap on the lower bound, reused across queries on this thread.
    thread_local std::vector<Entry> heap;
    heap.clear();
    auto cmp = [](const Entry& a, const Entry& b) { return a.first > b.first; };

    LineHit hit;
    double best = upper_bound;
    std::uint32_t best_index = 0;
    std::size_t visited = 0, tested = 0;
    auto bound = [&](const Node& node) {
        return line_sphere_lower_bound(origin, direction, node.center, node.radius) - slack(node);
    };
    heap.emplace_back(bound(nodes_[0]), 0u);
    while (!heap.empty()) {
        std::pop_heap(heap.begin(), heap.end(), cmp);
        const Entry top = heap.back();
        heap.pop_back();
        if (top.first >= best) break;
        const Node& node = nodes_[top.second];
        ++visited;
        if (node.leaf) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                const double d = point_line_squared(origin, direction, points_[i]);
                if (d < best) {
                    best = d;
                    best_index = i;
                    hit.found = true;
                }
            }
            tested += node.end - node.begin;
            continue;
        }
        for (std::uint32_t c = node.begin; c < node.end; ++c) {
            const double b = bound(nodes_[c]);
            if (b < best) {
                heap.emplace_back(b, c);
                std::push_heap(heap.begin(), heap.end(), cmp);
            }
        }
    }
    if (stats) {
        stats->nodes_visited += visited;
        stats->points_tested += tested;
    }
    if (hit.found) {
        hit.squared_distance = best;
        hit.point = points_[best_index];
    }
    return hit;
}

PointIndex build_index(std::span<const Position> points, const IndexParams& params) {
    return PointIndex(points, params);
}

} // namespace dynscene
