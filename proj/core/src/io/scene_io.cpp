// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/io/scene_io.hpp"

#include "dynscene/errors.hpp"
#include "dynscene/io/ply.hpp"
#include "dynscene/io/png.hpp"
#include "json_codec.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dynscene::io {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kBackgroundMagic{'D', 'S', 'B', 'G'};
constexpr std::uint32_t kBackgroundVersion = 1;

std::string numbered(const char* pattern, std::size_t i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, static_cast<int>(i));
    return buf;
}

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& in, const fs::path& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
        throw IoError("truncated background file " + path.string());
    }
    return v;
}

void take_bytes(std::istream& in, void* dst, std::size_t n, const fs::path& path) {
    if (n > 0 && !in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n))) {
        throw IoError("truncated background file " + path.string());
    }
}

std::vector<PlyProperty> frame_properties() {
    return {{"x", PlyType::float32},     {"y", PlyType::float32},   {"z", PlyType::float32},
            {"red", PlyType::uint8},     {"green", PlyType::uint8}, {"blue", PlyType::uint8},
            {"layer", PlyType::uint8},   {"valid", PlyType::uint8}, {"pose_index", PlyType::uint32}};
}

void write_frame_ply(const fs::path& path, const DynamicPointCloud& cloud, int t) {
    const PointSet& fg = cloud.foreground[t];
    const BackgroundLayer& bg = cloud.background;
    PlyTable table(frame_properties(), fg.size() + bg.size());
    std::size_t row = 0;
    auto emit = [&](const Position& p, const Rgb& c, int layer, int valid, PoseIndex pose) {
        table.set(row, 0, p.x());
        table.set(row, 1, p.y());
        table.set(row, 2, p.z());
        table.set(row, 3, c.r);
        table.set(row, 4, c.g);
        table.set(row, 5, c.b);
        table.set(row, 6, layer);
        table.set(row, 7, valid);
        table.set(row, 8, pose);
        ++row;
    };
    for (std::size_t i = 0; i < fg.size(); ++i) {
        emit(fg.positions[i], fg.colors[i], 1, 1, fg.source_pose[i]);
    }
    for (std::size_t i = 0; i < bg.size(); ++i) {
        emit(bg.positions[i], bg.colors[t][i], 0, bg.valid[t][i], bg.source_pose[i]);
    }
    write_ply(path, table, {"timestamp " + std::to_string(t), "layer 1 = foreground, 0 = background"});
}

PointSet read_frame_foreground(const fs::path& path, std::size_t expected_background) {
    const PlyTable table = read_ply(path);
    const std::size_t cx = table.column("x"), cy = table.column("y"), cz = table.column("z");
    const std::size_t cr = table.column("red"), cg = table.column("green"),
                      cb = table.column("blue");
    const std::size_t cl = table.column("layer"), cp = table.column("pose_index");
    PointSet fg;
    std::size_t background = 0;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        if (table.get(r, cl) == 0.0) {
            ++background;
            continue;
        }
        fg.push_back(Position(table.get_float(r, cx), table.get_float(r, cy), table.get_float(r, cz)),
                     Rgb{static_cast<std::uint8_t>(table.get(r, cr)),
                         static_cast<std::uint8_t>(table.get(r, cg)),
                         static_cast<std::uint8_t>(table.get(r, cb))},
                     static_cast<PoseIndex>(table.get(r, cp)));
    }
    if (background != expected_background) {
        throw IoError(path.string() + " holds " + std::to_string(background) +
                      " background points, background.bin holds " +
                      std::to_string(expected_background));
    }
    return fg;
}

} // namespace

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("cannot read " + path.string());
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out) throw IoError("cannot write " + path.string());
}

std::string camera_to_json(const Camera& camera) { return camera_json(camera).dump(2) + "\n"; }

Camera camera_from_json(const std::string& text) {
    return camera_from(parse_json(text, "camera JSON"));
}

void write_camera(const fs::path& path, const Camera& camera) {
    write_text(path, camera_to_json(camera));
}

Camera read_camera(const fs::path& path) {
    const Json j = parse_json(read_text(path), path.string());
    try {
        return camera_from(j);
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_cameras(const fs::path& path, const std::vector<Camera>& cameras) {
    Json list = Json::array();
    for (const auto& c : cameras) list.push_back(camera_json(c));
    write_text(path, Json{{"cameras", list}}.dump(2) + "\n");
}

std::vector<Camera> read_cameras(const fs::path& path) {
    const Json j = parse_json(read_text(path), path.string());
    if (!j.is_object() || !j.contains("cameras") || !j.at("cameras").is_array()) {
        throw ValidationError(path.string() + ": expected {\"cameras\": [...]}");
    }
    std::vector<Camera> cameras;
    for (const auto& c : j.at("cameras")) cameras.push_back(camera_from(c));
    return cameras;
}

void write_background_layer(const fs::path& path, const BackgroundLayer& layer) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path.string());
    const std::uint64_t count = layer.size();
    out.write(kBackgroundMagic.data(), kBackgroundMagic.size());
    put(out, kBackgroundVersion);
    put(out, static_cast<std::uint32_t>(layer.frame_count()));
    put(out, count);
    for (const auto& p : layer.positions) {
        const float xyz[3] = {p.x(), p.y(), p.z()};
        out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
    }
    for (PoseIndex pose : layer.source_pose) put(out, pose);
    std::vector<std::uint8_t> bits((count + 7) / 8);
    for (int t = 0; t < layer.frame_count(); ++t) {
        for (const Rgb& c : layer.colors[t]) {
            const std::uint8_t rgb[3] = {c.r, c.g, c.b};
            out.write(reinterpret_cast<const char*>(rgb), 3);
        }
        std::fill(bits.begin(), bits.end(), 0);
        for (std::size_t i = 0; i < count; ++i) {
            if (layer.valid[t][i]) bits[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
        }
        out.write(reinterpret_cast<const char*>(bits.data()),
                  static_cast<std::streamsize>(bits.size()));
    }
    out.close();
    if (!out) throw IoError("cannot write " + path.string());
}

BackgroundLayer read_background_layer(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::array<char, 4> magic{};
    take_bytes(in, magic.data(), magic.size(), path);
    if (magic != kBackgroundMagic) throw IoError(path.string() + " is not a background layer file");
    if (take<std::uint32_t>(in, path) != kBackgroundVersion) {
        throw IoError(path.string() + ": unsupported background layer version");
    }
    const auto frames = take<std::uint32_t>(in, path);
    const auto count = take<std::uint64_t>(in, path);
    const auto file_size = fs::file_size(path);
    if (count > file_size) throw IoError(path.string() + ": implausible point count");

    BackgroundLayer layer(static_cast<int>(frames));
    layer.positions.resize(count);
    layer.source_pose.resize(count);
    std::vector<float> xyz(count * 3);
    take_bytes(in, xyz.data(), xyz.size() * sizeof(float), path);
    for (std::size_t i = 0; i < count; ++i) {
        layer.positions[i] = Position(xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]);
    }
    take_bytes(in, layer.source_pose.data(), count * sizeof(PoseIndex), path);
    std::vector<std::uint8_t> rgb(count * 3);
    std::vector<std::uint8_t> bits((count + 7) / 8);
    for (std::uint32_t t = 0; t < frames; ++t) {
        take_bytes(in, rgb.data(), rgb.size(), path);
        take_bytes(in, bits.data(), bits.size(), path);
        auto& colors = layer.colors[t];
        auto& valid = layer.valid[t];
        colors.resize(count);
        valid.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            colors[i] = Rgb{rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]};
            valid[i] = (bits[i / 8] >> (i % 8)) & 1u;
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw IoError(path.string() + ": trailing bytes after background layer");
    }
    return layer;
}

void write_scene(const fs::path& dir, const SceneState& scene) {
    scene.cloud.check_consistent();
    if (scene.poses.empty()) throw ValidationError("write_scene: scene has no poses");
    if (scene.occluded_background.size() != scene.poses.size() ||
        scene.prompts.size() != scene.poses.size()) {
        throw ValidationError("write_scene: pose bookkeeping lists differ in length");
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string());

    const int n = scene.frame_count();
    for (int t = 0; t < n; ++t) write_frame_ply(dir / numbered("frame_%03d.ply", t), scene.cloud, t);
    write_background_layer(dir / "background.bin", scene.cloud.background);
    for (std::size_t i = 0; i < scene.occluded_background.size(); ++i) {
        write_mask_png(dir / numbered("occluded_%03d.png", i), scene.occluded_background[i]);
    }

    Json poses = Json::array();
    for (const auto& p : scene.poses) poses.push_back(camera_json(p));
    Json fg_counts = Json::array();
    for (const auto& fg : scene.cloud.foreground) fg_counts.push_back(fg.size());
    Json config;
    try {
        config = Json::parse(scene.config_json);
    } catch (const Json::exception&) {
        config = scene.config_json;
    }
    const Camera& first = scene.poses.front();
    Json state{{"format_version", kSceneFormatVersion},
               {"N", n},
               {"h", first.height()},
               {"w", first.width()},
               {"poses", poses},
               {"prompts", scene.prompts},
               {"foreground_counts", fg_counts},
               {"background_count", scene.cloud.background.size()},
               {"config", config}};
    write_text(dir / "state.json", state.dump(2) + "\n");
}

SceneState read_scene(const fs::path& dir) {
    // A damaged state file is an I/O problem, not a user input problem.
    const fs::path state_path = dir / "state.json";
    const std::string text = read_text(state_path);
    SceneState scene;
    int n = 0;
    std::vector<std::size_t> fg_counts;
    std::size_t bg_count = 0;
    try {
        const Json state = parse_json(text, state_path.string());
        if (state.at("format_version").get<int>() != kSceneFormatVersion) {
            throw IoError(state_path.string() + ": unsupported format_version");
        }
        n = state.at("N").get<int>();
        for (const auto& p : state.at("poses")) scene.poses.push_back(camera_from(p));
        scene.prompts = state.at("prompts").get<std::vector<std::string>>();
        fg_counts = state.at("foreground_counts").get<std::vector<std::size_t>>();
        bg_count = state.at("background_count").get<std::size_t>();
        const Json& config = state.at("config");
        scene.config_json = config.is_string() ? config.get<std::string>() : config.dump();
    } catch (const Json::exception& e) {
        throw IoError(state_path.string() + ": " + e.what());
    } catch (const ValidationError& e) {
        throw IoError(e.what());
    }
    if (scene.poses.empty() || scene.prompts.size() != scene.poses.size() ||
        static_cast<int>(fg_counts.size()) != n) {
        throw IoError(state_path.string() + ": inconsistent pose or frame bookkeeping");
    }
    scene.cloud.background = read_background_layer(dir / "background.bin");
    if (scene.cloud.background.frame_count() != n || scene.cloud.background.size() != bg_count) {
        throw IoError((dir / "background.bin").string() + " disagrees with state.json");
    }
    scene.cloud.foreground.resize(n);
    for (int t = 0; t < n; ++t) {
        const fs::path ply = dir / numbered("frame_%03d.ply", t);
        scene.cloud.foreground[t] = read_frame_foreground(ply, bg_count);
        if (scene.cloud.foreground[t].size() != fg_counts[t]) {
            throw IoError(ply.string() + " disagrees with state.json foreground count");
        }
    }
    const Camera& first = scene.poses.front();
    for (std::size_t i = 0; i < scene.poses.size(); ++i) {
        const fs::path png = dir / numbered("occluded_%03d.png", i);
        Mask m = read_mask_png(png);
        if (!m.same_shape(first.width(), first.height())) {
            throw IoError(png.string() + " has the wrong size");
        }
        scene.occluded_background.push_back(std::move(m));
    }
    scene.cloud.check_consistent();
    return scene;
}

void write_scene_atomic(const fs::path& dir, const SceneState& scene) {
    const fs::path target = dir.has_filename() ? dir : dir.parent_path();
    const fs::path staging = fs::path(target.string() + ".staging");
    const fs::path retired = fs::path(target.string() + ".retired");
    std::error_code ec;
    fs::remove_all(staging, ec);
    fs::remove_all(retired, ec);
    try {
        write_scene(staging, scene);
    } catch (...) {
        fs::remove_all(staging, ec);
        throw;
    }
    const bool had_old = fs::exists(target);
    if (had_old) {
        fs::rename(target, retired, ec);
        if (ec) throw IoError("cannot retire " + target.string() + ": " + ec.message());
    }
    fs::rename(staging, target, ec);
    if (ec) {
        if (had_old) fs::rename(retired, target, ec);
        throw IoError("cannot publish " + target.string());
    }
    fs::remove_all(retired, ec);
}

} // namespace dynscene::io
