// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dynscene/camera.hpp"
#include "dynscene/trajectory.hpp"

#include <json.hpp>

#include <string>

namespace dynscene::io {

using Json = nlohmann::json;

Json camera_json(const Camera& camera);
// Throws ValidationError on missing or malformed fields.
Camera camera_from(const Json& j);

Json trajectory_json(const TrajectorySpec& spec);
TrajectorySpec trajectory_from(const Json& j);

// Parses text, rethrowing parse errors as ValidationError tagged with `what`.
Json parse_json(const std::string& text, const std::string& what);

} // namespace dynscene::io
