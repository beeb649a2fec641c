// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/io/bundle_io.hpp"

#include "dynscene/errors.hpp"
#include "dynscene/io/pfm.hpp"
#include "dynscene/io/png.hpp"
#include "dynscene/io/scene_io.hpp"
#include "json_codec.hpp"

#include <cstdio>

namespace dynscene::io {

namespace fs = std::filesystem;

std::string frame_name(int t, const std::string& suffix) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%03d_", t);
    return buf + suffix;
}

namespace {

void write_manifest(const fs::path& dir, const Json& manifest) {
    const fs::path tmp = dir / "manifest.json.tmp";
    write_text(tmp, manifest.dump(2) + "\n");
    std::error_code ec;
    fs::rename(tmp, dir / "manifest.json", ec);
    if (ec) throw IoError("cannot publish " + (dir / "manifest.json").string());
}

} // namespace

void write_bundle(const fs::path& dir, const RayConditioningBundle& bundle) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string());
    for (int t = 0; t < bundle.frame_count(); ++t) {
        const auto& f = bundle.frames[t];
        RgbImage rgb = f.partial_rgb;
        for (std::size_t i = 0; i < rgb.size(); ++i) {
            if (!f.observed[i]) rgb[i] = Rgb{};
        }
        write_png(dir / frame_name(t, "rgb.png"), rgb);
        write_mask_png(dir / frame_name(t, "mask.png"), f.observed);
        write_pfm_masked(dir / frame_name(t, "raydepth.pfm"), f.ray_depth, f.observed);
        write_pfm_masked(dir / frame_name(t, "raydist.pfm"), f.ray_distance, f.unseen);
        write_mask_png(dir / frame_name(t, "invalid.png"), f.invalid_color);
    }
    Json manifest{{"format_version", kBundleFormatVersion},
                  {"N", bundle.frame_count()},
                  {"h", bundle.height()},
                  {"w", bundle.width()},
                  {"prompt", bundle.scene_prompt},
                  {"camera", camera_json(bundle.camera)}};
    write_manifest(dir, manifest);
}

RayConditioningBundle read_bundle(const fs::path& dir) {
    const Json manifest = parse_json(read_text(dir / "manifest.json"), "bundle manifest");
    RayConditioningBundle bundle;
    int n = 0, w = 0, h = 0;
    try {
        if (manifest.at("format_version").get<int>() != kBundleFormatVersion) {
            throw ValidationError("unsupported bundle format version in " + dir.string());
        }
        n = manifest.at("N").get<int>();
        h = manifest.at("h").get<int>();
        w = manifest.at("w").get<int>();
        bundle.scene_prompt = manifest.at("prompt").get<std::string>();
        bundle.camera = camera_from(manifest.at("camera"));
    } catch (const Json::exception& e) {
        throw ValidationError("malformed bundle manifest in " + dir.string() + ": " + e.what());
    }
    if (bundle.camera.width() != w || bundle.camera.height() != h) {
        throw ValidationError("bundle manifest size disagrees with its camera");
    }
    for (int t = 0; t < n; ++t) {
        ConditioningFrame f;
        f.partial_rgb = read_png_rgb(dir / frame_name(t, "rgb.png"));
        f.observed = read_mask_png(dir / frame_name(t, "mask.png"));
        const DepthMap depth = read_pfm(dir / frame_name(t, "raydepth.pfm"));
        const DepthMap dist = read_pfm(dir / frame_name(t, "raydist.pfm"));
        if (!f.partial_rgb.same_shape(w, h) || !f.observed.same_shape(w, h) ||
            !depth.same_shape(w, h) || !dist.same_shape(w, h)) {
            throw ValidationError("bundle frame " + std::to_string(t) + " has the wrong size");
        }
        f.ray_depth = DepthMap(w, h);
        f.ray_distance = DepthMap(w, h);
        f.unseen = Mask(w, h);
        for (std::size_t i = 0; i < depth.size(); ++i) {
            if (f.observed[i]) f.ray_depth[i] = depth[i];
            if (dist[i] >= 0.0) {
                f.unseen[i] = 1;
                f.ray_distance[i] = dist[i];
            }
        }
        const fs::path invalid = dir / frame_name(t, "invalid.png");
        f.invalid_color = fs::exists(invalid) ? read_mask_png(invalid) : Mask(w, h);
        f.foreground = Mask(w, h);
        bundle.frames.push_back(std::move(f));
    }
    return bundle;
}

void write_result(const fs::path& dir, const OutpaintResult& result, int width, int height) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string());
    for (std::size_t t = 0; t < result.frames.size(); ++t) {
        const int ti = static_cast<int>(t);
        write_png(dir / frame_name(ti, "rgb.png"), result.frames[t]);
        if (t < result.depths.size()) write_pfm(dir / frame_name(ti, "depth.pfm"), result.depths[t]);
        if (t < result.foreground.size()) {
            write_mask_png(dir / frame_name(ti, "fgmask.png"), result.foreground[t]);
        }
    }
    Json manifest{{"format_version", kBundleFormatVersion},
                  {"N", result.frames.size()},
                  {"h", height},
                  {"w", width},
                  {"provenance", result.provenance},
                  {"preserves_observed", result.preserves_observed}};
    write_manifest(dir, manifest);
}

OutpaintResult read_result(const fs::path& dir, int expected_frames, int expected_width,
                           int expected_height) {
    Json manifest;
    try {
        manifest = Json::parse(read_text(dir / "manifest.json"));
    } catch (const Json::exception& e) {
        throw MalformedResult("result manifest in " + dir.string() + " is not valid JSON: " +
                              e.what());
    } catch (const IoError& e) {
        throw MalformedResult(e.what());
    }
    if (!manifest.is_object()) throw MalformedResult("result manifest must be a JSON object");

    int present = 0;
    while (fs::exists(dir / frame_name(present, "rgb.png"))) ++present;
    int declared = present;
    OutpaintResult result;
    try {
        if (manifest.contains("format_version") &&
            manifest.at("format_version").get<int>() != kBundleFormatVersion) {
            throw MalformedResult("result manifest has unsupported format_version");
        }
        if (manifest.contains("N")) declared = manifest.at("N").get<int>();
        if (manifest.contains("w") && manifest.at("w").get<int>() != expected_width) {
            throw DimensionMismatch("result manifest width " +
                                    std::to_string(manifest.at("w").get<int>()) + ", expected " +
                                    std::to_string(expected_width));
        }
        if (manifest.contains("h") && manifest.at("h").get<int>() != expected_height) {
            throw DimensionMismatch("result manifest height " +
                                    std::to_string(manifest.at("h").get<int>()) + ", expected " +
                                    std::to_string(expected_height));
        }
        result.provenance = manifest.value("provenance", std::string("unknown"));
        result.preserves_observed = manifest.value("preserves_observed", true);
    } catch (const Json::exception& e) {
        throw MalformedResult(std::string("result manifest has malformed fields: ") + e.what());
    }
    if (declared != expected_frames) {
        throw DimensionMismatch("result declares " + std::to_string(declared) +
                                " frames, expected " + std::to_string(expected_frames));
    }
    if (present < declared) {
        throw MalformedResult("result manifest declares " + std::to_string(declared) +
                              " frames but only " + std::to_string(present) + " are present");
    }
    try {
        for (int t = 0; t < declared; ++t) {
            RgbImage frame = read_png_rgb(dir / frame_name(t, "rgb.png"));
            if (!frame.same_shape(expected_width, expected_height)) {
                throw DimensionMismatch("result frame " + std::to_string(t) + " is " +
                                        std::to_string(frame.width()) + "x" +
                                        std::to_string(frame.height()) + ", expected " +
                                        std::to_string(expected_width) + "x" +
                                        std::to_string(expected_height));
            }
            result.frames.push_back(std::move(frame));
        }
        const bool has_depth = fs::exists(dir / frame_name(0, "depth.pfm"));
        const bool has_fg = fs::exists(dir / frame_name(0, "fgmask.png"));
        for (int t = 0; t < declared; ++t) {
            if (has_depth) result.depths.push_back(read_pfm(dir / frame_name(t, "depth.pfm")));
            if (has_fg) result.foreground.push_back(read_mask_png(dir / frame_name(t, "fgmask.png")));
        }
    } catch (const IoError& e) {
        throw MalformedResult(std::string("unreadable result file: ") + e.what());
    }
    return result;
}

} // namespace dynscene::io
