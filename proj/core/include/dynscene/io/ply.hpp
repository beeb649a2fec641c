// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dynscene::io {

enum class PlyType { int8, uint8, int16, uint16, int32, uint32, float32, float64 };

std::size_t ply_type_size(PlyType type);

struct PlyProperty {
    std::string name;
    PlyType type = PlyType::float32;
};

// A single-element ("vertex") binary little-endian PLY table with packed rows.
class PlyTable {
public:
    PlyTable() = default;
    PlyTable(std::vector<PlyProperty> properties, std::size_t rows);

    std::size_t rows() const { return rows_; }
    std::size_t row_stride() const { return stride_; }
    const std::vector<PlyProperty>& properties() const { return properties_; }
    // Throws IoError when the property is missing.
    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;

    template <typename T>
    void set(std::size_t row, std::size_t col, T value);
    // Converts from the stored type.
    double get(std::size_t row, std::size_t col) const;
    float get_float(std::size_t row, std::size_t col) const;

    std::vector<std::uint8_t>& bytes() { return data_; }
    const std::vector<std::uint8_t>& bytes() const { return data_; }

private:
    std::vector<PlyProperty> properties_;
    std::vector<std::size_t> offsets_;
    std::size_t stride_ = 0;
    std::size_t rows_ = 0;
    std::vector<std::uint8_t> data_;
};

void write_ply(const std::filesystem::path& path, const PlyTable& table,
               const std::vector<std::string>& comments = {});
// Reads the "vertex" element of a binary_little_endian PLY; other elements
// must not precede it. Throws IoError on anything else.
PlyTable read_ply(const std::filesystem::path& path);

} // namespace dynscene::io

#include "dynscene/io/ply_impl.hpp"
