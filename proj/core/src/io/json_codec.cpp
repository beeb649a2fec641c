// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "json_codec.hpp"

#include "dynscene/errors.hpp"

namespace dynscene::io {
namespace {

Eigen::Vector3d vec3(const Json& j, const char* key) {
    const Json& v = j.at(key);
    if (!v.is_array() || v.size() != 3) {
        throw ValidationError(std::string("'") + key + "' must be an array of 3 numbers");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

} // namespace

Json camera_json(const Camera& camera) {
    const auto& k = camera.intrinsics();
    Json m = Json::array();
    const Eigen::Matrix4d pose = camera.pose().matrix();
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) m.push_back(pose(r, c));
    }
    return Json{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy},
                {"width", k.width}, {"height", k.height}, {"camera_to_world", m}};
}

Camera camera_from(const Json& j) {
    try {
        Intrinsics k;
        k.fx = j.at("fx").get<double>();
        k.fy = j.at("fy").get<double>();
        k.cx = j.at("cx").get<double>();
        k.cy = j.at("cy").get<double>();
        k.width = j.at("width").get<int>();
        k.height = j.at("height").get<int>();
        Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
        if (j.contains("camera_to_world")) {
            const Json& a = j.at("camera_to_world");
            if (!a.is_array() || a.size() != 16) {
                throw ValidationError("camera_to_world must hold 16 numbers (row-major 4x4)");
            }
            for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = a[i].get<double>();
        }
        return Camera(k, RigidTransform::from_matrix(m));
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("malformed camera: ") + e.what());
    }
}

Json trajectory_json(const TrajectorySpec& spec) {
    Json j;
    switch (spec.kind) {
    case TrajectoryKind::translate_line:
        j = {{"kind", "translate_line"},
             {"n_steps", spec.n_steps},
             {"direction", {spec.direction.x(), spec.direction.y(), spec.direction.z()}},
             {"step_translation", spec.step_translation}};
        break;
    case TrajectoryKind::rotate:
        j = {{"kind", "rotate"},
             {"n_steps", spec.n_steps},
             {"axis", {spec.axis.x(), spec.axis.y(), spec.axis.z()}},
             {"rotation", spec.rotation},
             {"rotation_is_total", spec.rotation_is_total}};
        break;
    case TrajectoryKind::composite: {
        Json segs = Json::array();
        for (const auto& s : spec.segments) segs.push_back(trajectory_json(s));
        j = {{"kind", "composite"}, {"segments", segs}};
        break;
    }
    }
    return j;
}

TrajectorySpec trajectory_from(const Json& j) {
    try {
        TrajectorySpec spec;
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "translate_line") {
            spec.kind = TrajectoryKind::translate_line;
            if (j.contains("direction")) spec.direction = vec3(j, "direction");
            spec.step_translation = j.value("step_translation", spec.step_translation);
        } else if (kind == "rotate") {
            spec.kind = TrajectoryKind::rotate;
            if (j.contains("axis")) spec.axis = vec3(j, "axis");
            spec.rotation = j.value("rotation", spec.rotation);
            spec.rotation_is_total = j.value("rotation_is_total", spec.rotation_is_total);
        } else if (kind == "composite") {
            spec.kind = TrajectoryKind::composite;
            for (const auto& s : j.at("segments")) spec.segments.push_back(trajectory_from(s));
        } else {
            throw ValidationError("unknown trajectory kind '" + kind + "'");
        }
        spec.n_steps = j.value("n_steps", spec.n_steps);
        return spec;
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("malformed trajectory: ") + e.what());
    }
}

Json parse_json(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ValidationError(what + ": " + e.what());
    }
}

} // namespace dynscene::io
