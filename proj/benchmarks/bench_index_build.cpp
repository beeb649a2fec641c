// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0

#include "dynscene/point_index.hpp"
#include "dynscene/synthetic.hpp"

#include <benchmark/benchmark.h>

using namespace dynscene;

namespace {

// Index construction over uniform points; arg is the point count.
void BM_IndexBuild(benchmark::State& state) {
    const auto pts = synthetic::uniform_points(static_cast<std::size_t>(state.range(0)), {-2, -2, 1},
                                               {2, 2, 6}, 3);
    for (auto _ : state) benchmark::DoNotOptimize(build_index(pts));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IndexBuild)->RangeMultiplier(10)->Range(1000, 1000000)->Unit(benchmark::kMillisecond);

// Single-line nearest queries against a fixed cloud.
void BM_IndexLineQuery(benchmark::State& state) {
    const auto pts = synthetic::uniform_points(static_cast<std::size_t>(state.range(0)), {-2, -2, 1},
                                               {2, 2, 6}, 4);
    const PointIndex index = build_index(pts);
    const auto dirs = synthetic::uniform_points(1024, {-0.5, -0.5, 1}, {0.5, 0.5, 1}, 5);
    std::size_t i = 0;
    for (auto _ : state) {
        const Eigen::Vector3d d = dirs[i++ % dirs.size()].cast<double>().normalized();
        benchmark::DoNotOptimize(index.min_squared_line_distance(Eigen::Vector3d::Zero(), d));
    }
}
BENCHMARK(BM_IndexLineQuery)->RangeMultiplier(10)->Range(1000, 1000000);

} // namespace

BENCHMARK_MAIN();
