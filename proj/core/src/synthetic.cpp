// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/synthetic.hpp"

#include "dynscene/errors.hpp"
#include "dynscene/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace dynscene::synthetic {
namespace {

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

double background_depth_at(const VideoOptions& o, double u, double v) {
    switch (o.background) {
    case Background::plane:
        return o.base_depth;
    case Background::tilted_plane:
        // Plane z = base + 0.5 * X intersected with the ray (u, v, 1).
        return o.base_depth / (1.0 - 0.5 * u);
    case Background::wavy:
        return o.base_depth + 0.25 * std::sin(6.0 * u) * std::cos(5.0 * v);
    }
    return o.base_depth;
}

} // namespace

Camera default_camera(int width, int height) {
    Intrinsics k;
    k.fx = width;
    k.fy = width;
    k.cx = width / 2.0;
    k.cy = height / 2.0;
    k.width = width;
    k.height = height;
    return Camera(k, RigidTransform::identity());
}

InitInput make_video(const VideoOptions& o) {
    if (o.frames < 1 || o.width < 1 || o.height < 1 || !(o.base_depth > 0.0)) {
        throw ValidationError("synthetic video needs positive frame count, size and depth");
    }
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const double pr = phase(rng), pg = phase(rng), pb = phase(rng);
    const double sphere_hue = phase(rng);

    InitInput input;
    input.camera = default_camera(o.width, o.height);
    input.scene_prompt = "synthetic sphere scene";
    const auto& k = input.camera.intrinsics();
    input.frames.resize(static_cast<std::size_t>(o.frames));
    parallel_for(0, input.frames.size(), [&](std::size_t ti) {
        const double t = static_cast<double>(ti);
        const double along = o.frames > 1 ? t / (o.frames - 1) : 0.0;
        const Eigen::Vector3d center(-0.5 * o.sphere_travel + o.sphere_travel * along, 0.1,
                                     o.sphere_depth);
        FrameBundle f{RgbImage(o.width, o.height), DepthMap(o.width, o.height),
                      Mask(o.width, o.height), static_cast<int>(ti)};
        for (int y = 0; y < o.height; ++y) {
            for (int x = 0; x < o.width; ++x) {
                const double u = (x - k.cx) / k.fx;
                const double v = (y - k.cy) / k.fy;
                double depth = background_depth_at(o, u, v);
                const double drift = 0.15 * t;
                Rgb color{to_byte(128.0 + 90.0 * std::sin(9.0 * u + pr + drift)),
                          to_byte(128.0 + 90.0 * std::sin(7.0 * v + pg - drift)),
                          to_byte(128.0 + 90.0 * std::sin(5.0 * (u + v) + pb))};
                if (o.sphere_radius > 0.0) {
                    const Eigen::Vector3d d(u, v, 1.0);
                    const double b = d.dot(center);
                    const double disc =
                        b * b - d.squaredNorm() * (center.squaredNorm() - o.sphere_radius * o.sphere_radius);
                    if (disc >= 0.0) {
                        const double z = (b - std::sqrt(disc)) / d.squaredNorm();
                        if (z > 0.0 && z < depth) {
                            depth = z;
                            const Eigen::Vector3d n = (z * d - center).normalized();
                            const double shade = 0.35 + 0.65 * std::max(0.0, -n.z());
                            color = Rgb{to_byte(shade * (180.0 + 60.0 * std::sin(sphere_hue))),
                                        to_byte(shade * 110.0), to_byte(shade * 60.0)};
                            f.fg_mask(x, y) = 1;
                        }
                    }
                }
                f.depth(x, y) = depth;
                f.rgb(x, y) = color;
            }
        }
        input.frames[ti] = std::move(f);
    });
    return input;
}

std::vector<Position> uniform_points(std::size_t n, const Eigen::Vector3d& lo,
                                     const Eigen::Vector3d& hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Position> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d u(unit(rng), unit(rng), unit(rng));
        out.push_back((lo + u.cwiseProduct(hi - lo)).cast<float>());
    }
    return out;
}

} // namespace dynscene::synthetic
