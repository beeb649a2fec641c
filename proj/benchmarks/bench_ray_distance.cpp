// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0

#include "dynscene/point_index.hpp"
#include "dynscene/ray_geometry.hpp"
#include "dynscene/synthetic.hpp"

#include <benchmark/benchmark.h>

using namespace dynscene;

namespace {

// Full ray distance map over a synthetic init cloud; arg is the image side.
void BM_RayDistanceMap(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    synthetic::VideoOptions o;
    o.frames = 2;
    o.width = side;
    o.height = side;
    const InitInput in = synthetic::make_video(o);
    std::vector<Position> cloud;
    for (const auto& f : in.frames)
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x) cloud.push_back(backproject(in.camera, x, y, f.depth(x, y)).cast<float>());
    const PointIndex index(cloud);
    RigidTransform back;
    back.translation = {0.1, 0.0, -0.3};
    const Camera cam = in.camera.with_pose(back);
    const Mask all(side, side, 1);
    for (auto _ : state) benchmark::DoNotOptimize(ray_distance_map(cam, all, index));
    state.SetItemsProcessed(state.iterations() * side * side);
    state.counters["points"] = static_cast<double>(cloud.size());
}
BENCHMARK(BM_RayDistanceMap)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_DistR2P(benchmark::State& state) {
    const auto pts = synthetic::uniform_points(4096, {-1, -1, 1}, {1, 1, 3}, 1);
    const Eigen::Vector3d r = Eigen::Vector3d(0.1, -0.2, 1.0).normalized();
    for (auto _ : state) {
        double sum = 0.0;
        for (const auto& p : pts) sum += dist_r2p(r, p.cast<double>());
        benchmark::DoNotOptimize(sum);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}
BENCHMARK(BM_DistR2P);

} // namespace

BENCHMARK_MAIN();
