// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/camera.hpp"
#include "dynscene/image.hpp"
#include "dynscene/point_cloud.hpp"

#include <string>
#include <vector>

namespace dynscene {

// Everything accumulated across outpainting iterations. poses[0] is the
// initialization pose; occluded_background[i] flags pixels at poses[i] whose
// background was never observed (cleared once completed).
struct SceneState {
    DynamicPointCloud cloud;
    std::vector<Camera> poses;
    std::vector<Mask> occluded_background;
    std::vector<std::string> prompts;
    // Opaque JSON snapshot of the configuration that produced this state.
    std::string config_json = "{}";

    int frame_count() const { return cloud.frame_count(); }
    std::size_t point_count() const { return cloud.total_count(); }
};

} // namespace dynscene
