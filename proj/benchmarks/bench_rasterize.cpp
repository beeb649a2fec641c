// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0

#include "dynscene/rasterizer.hpp"
#include "dynscene/scene_init.hpp"
#include "dynscene/synthetic.hpp"

#include <benchmark/benchmark.h>

using namespace dynscene;

namespace {

// Rasterizes every frame of an initialized synthetic scene; args are image
// side and splat radius.
void BM_RasterizeVideo(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const int radius = static_cast<int>(state.range(1));
    synthetic::VideoOptions o;
    o.frames = 4;
    o.width = side;
    o.height = side;
    const InitInput in = synthetic::make_video(o);
    const SceneState scene = initialize_scene(in);
    RigidTransform side_step;
    side_step.translation = {0.2, 0.0, -0.4};
    const Camera cam = in.camera.with_pose(side_step);
    for (auto _ : state) benchmark::DoNotOptimize(rasterize_video(scene.cloud, cam, radius));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scene.point_count()));
}
BENCHMARK(BM_RasterizeVideo)
    ->Args({128, 0})
    ->Args({128, 1})
    ->Args({512, 0})
    ->Args({512, 1})
    ->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
