// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/oracle.hpp"

#include "dynscene/camera.hpp"
#include "dynscene/errors.hpp"
#include "dynscene/point_index.hpp"
#include "dynscene/rasterizer.hpp"
#include "dynscene/ray_geometry.hpp"
#include "dynscene/scene_init.hpp"
#include "dynscene/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace dynscene {
namespace {

double relative_error(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

Camera random_camera(int size, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> small(-0.3, 0.3);
    Intrinsics k{size * 0.9, size * 0.9, size / 2.0, size / 2.0, size, size};
    RigidTransform pose;
    pose.rotation = (Eigen::AngleAxisd(small(rng), Eigen::Vector3d::UnitY()) *
                     Eigen::AngleAxisd(small(rng), Eigen::Vector3d::UnitX()))
                        .toRotationMatrix();
    pose.translation = Eigen::Vector3d(small(rng), small(rng), small(rng) - 1.0);
    return Camera(k, pose);
}

double brute_min_squared(std::span<const Position> points, const Eigen::Vector3d& origin,
                         const Eigen::Vector3d& dir) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
        const Eigen::Vector3d d = p.cast<double>() - origin;
        const double along = dir.dot(d);
        best = std::min(best, std::max(0.0, d.squaredNorm() - along * along));
    }
    return best;
}

void check_ray_distance(const OracleConfig& config, std::uint64_t seed, OracleReport& report) {
    for (std::size_t count : config.point_counts) {
        std::mt19937_64 rng(seed ^ (count * 0x9e3779b97f4a7c15ull));
        const auto points = synthetic::uniform_points(count, {-1.0, -1.0, 1.0}, {1.0, 1.0, 3.0},
                                                      rng());
        const Camera camera = random_camera(config.ray_grid, rng);
        const PointIndex index(points);
        const Mask all(camera.width(), camera.height(), 1);
        const RayDistanceMap fast = ray_distance_map(camera, all, index);
        double worst = 0.0;
        int wx = 0, wy = 0;
        for (int y = 0; y < camera.height(); ++y) {
            for (int x = 0; x < camera.width(); ++x) {
                const double slow = std::sqrt(
                    brute_min_squared(points, camera.center(), camera.ray_direction(x, y)));
                const double err = relative_error(fast.values(x, y), slow);
                if (err > worst) {
                    worst = err;
                    wx = x;
                    wy = y;
                }
            }
        }
        std::ostringstream name;
        name << "ray_distance_vs_brute_force[" << count << " points]";
        if (worst > 1e-9) {
            std::ostringstream detail;
            detail << "relative error " << worst << " at pixel (" << wx << "," << wy << ")";
            report.violations.push_back({name.str(), seed, detail.str()});
        } else {
            report.passed.push_back(name.str());
        }
    }
}

void check_rasterizer(const OracleConfig& config, std::uint64_t seed, OracleReport& report) {
    std::mt19937_64 rng(seed + 17);
    const int size = config.raster_size;
    const Camera camera = synthetic::default_camera(size, size);
    PointSet cloud;
    const auto positions = synthetic::uniform_points(config.raster_points, {-1.0, -1.0, 0.5},
                                                     {1.0, 1.0, 3.0}, rng());
    std::uniform_int_distribution<int> byte(0, 255);
    for (const auto& p : positions) {
        cloud.push_back(p, Rgb{static_cast<std::uint8_t>(byte(rng)),
                               static_cast<std::uint8_t>(byte(rng)),
                               static_cast<std::uint8_t>(byte(rng))},
                        0);
    }
    for (int radius : {0, 1, 2}) {
        const RasterOutput fast = rasterize(cloud, camera, radius);
        std::size_t mismatches = 0;
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                double best = std::numeric_limits<double>::infinity();
                std::size_t win = cloud.size();
                for (std::size_t i = 0; i < cloud.size(); ++i) {
                    const auto proj = project(camera, cloud.positions[i].cast<double>());
                    if (!proj) continue;
                    const int px = pixel_index(proj->x);
                    const int py = pixel_index(proj->y);
                    if (px < 0 || py < 0 || px >= size || py >= size) continue;
                    if (std::abs(px - x) > radius || std::abs(py - y) > radius) continue;
                    if (proj->depth < best - kDepthTieTolerance) {
                        best = proj->depth;
                        win = i;
                    }
                }
                const bool seen = win < cloud.size();
                if (seen != (fast.observed(x, y) != 0) ||
                    (seen && (fast.ray_depth(x, y) != best ||
                              !(fast.partial_rgb(x, y) == cloud.colors[win])))) {
                    ++mismatches;
                }
            }
        }
        std::ostringstream name;
        name << "rasterizer_vs_brute_force[radius " << radius << "]";
        if (mismatches > 0) {
            report.violations.push_back(
                {name.str(), seed, std::to_string(mismatches) + " pixels differ"});
        } else {
            report.passed.push_back(name.str());
        }
    }
}

void check_background_depth(const OracleConfig& config, std::uint64_t seed, OracleReport& report) {
    std::mt19937_64 rng(seed + 31);
    std::uniform_real_distribution<double> depth(0.5, 10.0);
    std::bernoulli_distribution fg(0.6);
    const int s = config.video_size;
    std::vector<DepthMap> depths;
    std::vector<Mask> masks;
    for (int t = 0; t < config.video_frames; ++t) {
        DepthMap d(s, s);
        Mask m(s, s);
        for (std::size_t i = 0; i < d.size(); ++i) {
            d[i] = depth(rng);
            m[i] = fg(rng) ? 1 : 0;
        }
        depths.push_back(std::move(d));
        masks.push_back(std::move(m));
    }
    const BackgroundDepth fast = background_depth(depths, masks);
    std::size_t mismatches = 0;
    for (int y = 0; y < s; ++y) {
        for (int x = 0; x < s; ++x) {
            double num = 0.0, den = 0.0, all = 0.0;
            for (int t = 0; t < config.video_frames; ++t) {
                const double keep = masks[t](x, y) ? 0.0 : 1.0;
                num += depths[t](x, y) * keep;
                den += keep;
                all += depths[t](x, y);
            }
            const bool flag = den == 0.0;
            const double expect = flag ? all / config.video_frames : num / den;
            if (fast.depth(x, y) != expect || (fast.always_occluded(x, y) != 0) != flag) {
                ++mismatches;
            }
        }
    }
    if (mismatches > 0) {
        report.violations.push_back(
            {"background_depth_vs_loop", seed, std::to_string(mismatches) + " pixels differ"});
    } else {
        report.passed.push_back("background_depth_vs_loop");
    }
}

void check_round_trip(const OracleConfig& config, std::uint64_t seed, OracleReport& report) {
    std::mt19937_64 rng(seed + 47);
    const Camera camera = random_camera(config.ray_grid, rng);
    std::uniform_real_distribution<double> px(-0.5, camera.width() - 0.5);
    std::uniform_real_distribution<double> depth(0.1, 50.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double x = px(rng), y = px(rng), d = depth(rng);
        const auto p = project(camera, backproject(camera, x, y, d));
        if (!p) {
            worst = std::numeric_limits<double>::infinity();
            break;
        }
        worst = std::max({worst, std::abs(p->x - x), std::abs(p->y - y),
                          relative_error(p->depth, d)});
    }
    if (worst > 1e-9) {
        report.violations.push_back(
            {"project_backproject_round_trip", seed, "max error " + std::to_string(worst)});
    } else {
        report.passed.push_back("project_backproject_round_trip");
    }
}

void check_video_round_trip(const OracleConfig& config, std::uint64_t seed, OracleReport& report) {
    synthetic::VideoOptions o;
    o.frames = config.video_frames;
    o.width = config.video_size;
    o.height = config.video_size;
    o.seed = seed;
    const InitInput input = synthetic::make_video(o);
    const SceneState scene = initialize_scene(input);
    const auto frames = rasterize_video(scene.cloud, input.camera, 0);
    std::size_t valid = 0, reproduced = 0;
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const auto& f = input.frames[t];
        const auto& r = frames[t];
        for (std::size_t i = 0; i < f.depth.size(); ++i) {
            // Foreground pixels are lifted at their own depth; background at the
            // temporal mean, which equals the frame depth for a static scene.
            const double d = f.depth[i];
            if (!(d > 0.0)) continue;
            ++valid;
            if (r.observed[i] && r.partial_rgb[i] == f.rgb[i] &&
                std::abs(r.ray_depth[i] - d) <= 1e-4 * d) {
                ++reproduced;
            }
        }
    }
    const double fraction = valid ? static_cast<double>(reproduced) / valid : 1.0;
    if (fraction < 0.99) {
        report.violations.push_back(
            {"rasterize_round_trip", seed, "reproduced fraction " + std::to_string(fraction)});
    } else {
        report.passed.push_back("rasterize_round_trip");
    }
}

} // namespace

OracleReport run_oracle(const OracleConfig& config, std::uint64_t base_seed) {
    if (config.seeds < 1 || config.ray_grid < 1 || config.raster_size < 1 ||
        config.video_size < 1 || config.video_frames < 1) {
        throw ValidationError("oracle configuration needs positive sizes and seed count");
    }
    OracleReport report;
    for (int s = 0; s < config.seeds; ++s) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(s);
        check_ray_distance(config, seed, report);
        check_rasterizer(config, seed, report);
        check_background_depth(config, seed, report);
        check_round_trip(config, seed, report);
        check_video_round_trip(config, seed, report);
    }
    return report;
}

} // namespace dynscene
