// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/io/pfm.hpp"

#include "dynscene/errors.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace dynscene::io {
namespace {

std::uint32_t byteswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

void write_floats(const std::filesystem::path& path, int width, int height,
                  const std::vector<float>& values) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "Pf\n" << width << ' ' << height << "\n-1.0\n";
    std::vector<std::uint32_t> row(static_cast<std::size_t>(width));
    for (int y = height - 1; y >= 0; --y) {
        std::memcpy(row.data(), values.data() + static_cast<std::size_t>(y) * width,
                    row.size() * sizeof(float));
        if constexpr (std::endian::native == std::endian::big) {
            for (auto& v : row) v = byteswap32(v);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw IoError("failed writing " + path.string());
}

std::string next_token(std::istream& in) {
    std::string token;
    in >> token;
    return token;
}

} // namespace

void write_pfm(const std::filesystem::path& path, const DepthMap& map) {
    std::vector<float> values(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) values[i] = static_cast<float>(map[i]);
    write_floats(path, map.width(), map.height(), values);
}

void write_pfm_masked(const std::filesystem::path& path, const DepthMap& map, const Mask& defined,
                      float sentinel) {
    if (!defined.same_shape(map)) throw ValidationError("write_pfm_masked: shape mismatch");
    std::vector<float> values(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
        values[i] = defined[i] ? static_cast<float>(map[i]) : sentinel;
    }
    write_floats(path, map.width(), map.height(), values);
}

DepthMap read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::string magic = next_token(in);
    if (magic == "PF") throw IoError(path.string() + ": 3-channel PFM is not a depth map");
    if (magic != "Pf") throw IoError(path.string() + " is not a PFM file");
    int width = 0, height = 0;
    double scale = 0.0;
    try {
        width = std::stoi(next_token(in));
        height = std::stoi(next_token(in));
        scale = std::stod(next_token(in));
    } catch (const std::exception&) {
        throw IoError(path.string() + ": malformed PFM header");
    }
    in.get();  // single whitespace byte after the scale
    if (width <= 0 || height <= 0 || scale == 0.0) {
        throw IoError(path.string() + ": malformed PFM header");
    }
    const bool little = scale < 0.0;
    const bool swap = little != (std::endian::native == std::endian::little);
    DepthMap map(width, height);
    std::vector<std::uint32_t> row(static_cast<std::size_t>(width));
    for (int y = height - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!in) throw IoError(path.string() + ": truncated PFM data");
        for (int x = 0; x < width; ++x) {
            std::uint32_t bits = swap ? byteswap32(row[x]) : row[x];
            float v;
            std::memcpy(&v, &bits, sizeof(float));
            map(x, y) = v;
        }
    }
    return map;
}

} // namespace dynscene::io
