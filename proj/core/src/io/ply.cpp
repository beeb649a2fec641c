// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/io/ply.hpp"

#include "dynscene/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dynscene::io {
namespace {

static_assert(std::endian::native == std::endian::little,
              "PLY I/O assumes a little-endian host");

const char* type_name(PlyType t) {
    switch (t) {
    case PlyType::int8: return "char";
    case PlyType::uint8: return "uchar";
    case PlyType::int16: return "short";
    case PlyType::uint16: return "ushort";
    case PlyType::int32: return "int";
    case PlyType::uint32: return "uint";
    case PlyType::float32: return "float";
    case PlyType::float64: return "double";
    }
    return "?";
}

bool parse_type(const std::string& s, PlyType& t) {
    if (s == "char" || s == "int8") t = PlyType::int8;
    else if (s == "uchar" || s == "uint8") t = PlyType::uint8;
    else if (s == "short" || s == "int16") t = PlyType::int16;
    else if (s == "ushort" || s == "uint16") t = PlyType::uint16;
    else if (s == "int" || s == "int32") t = PlyType::int32;
    else if (s == "uint" || s == "uint32") t = PlyType::uint32;
    else if (s == "float" || s == "float32") t = PlyType::float32;
    else if (s == "double" || s == "float64") t = PlyType::float64;
    else return false;
    return true;
}

template <typename T>
T load(const std::uint8_t* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

} // namespace

std::size_t ply_type_size(PlyType type) {
    switch (type) {
    case PlyType::int8:
    case PlyType::uint8: return 1;
    case PlyType::int16:
    case PlyType::uint16: return 2;
    case PlyType::int32:
    case PlyType::uint32:
    case PlyType::float32: return 4;
    case PlyType::float64: return 8;
    }
    return 0;
}

PlyTable::PlyTable(std::vector<PlyProperty> properties, std::size_t rows)
    : properties_(std::move(properties)), rows_(rows) {
    for (const auto& p : properties_) {
        offsets_.push_back(stride_);
        stride_ += ply_type_size(p.type);
    }
    data_.assign(stride_ * rows_, 0);
}

bool PlyTable::has_column(const std::string& name) const {
    for (const auto& p : properties_) {
        if (p.name == name) return true;
    }
    return false;
}

std::size_t PlyTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < properties_.size(); ++i) {
        if (properties_[i].name == name) return i;
    }
    throw IoError("PLY has no vertex property '" + name + "'");
}

double PlyTable::get(std::size_t row, std::size_t col) const {
    const std::uint8_t* p = data_.data() + row * stride_ + offsets_[col];
    switch (properties_[col].type) {
    case PlyType::int8: return load<std::int8_t>(p);
    case PlyType::uint8: return load<std::uint8_t>(p);
    case PlyType::int16: return load<std::int16_t>(p);
    case PlyType::uint16: return load<std::uint16_t>(p);
    case PlyType::int32: return load<std::int32_t>(p);
    case PlyType::uint32: return load<std::uint32_t>(p);
    case PlyType::float32: return load<float>(p);
    case PlyType::float64: return load<double>(p);
    }
    return 0.0;
}

float PlyTable::get_float(std::size_t row, std::size_t col) const {
    if (properties_[col].type == PlyType::float32) {
        return load<float>(data_.data() + row * stride_ + offsets_[col]);
    }
    return static_cast<float>(get(row, col));
}

void write_ply(const std::filesystem::path& path, const PlyTable& table,
               const std::vector<std::string>& comments) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "ply\nformat binary_little_endian 1.0\n";
    for (const auto& c : comments) out << "comment " << c << '\n';
    out << "element vertex " << table.rows() << '\n';
    for (const auto& p : table.properties()) {
        out << "property " << type_name(p.type) << ' ' << p.name << '\n';
    }
    out << "end_header\n";
    out.write(reinterpret_cast<const char*>(table.bytes().data()),
              static_cast<std::streamsize>(table.bytes().size()));
    if (!out) throw IoError("failed writing " + path.string());
}

PlyTable read_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "ply") throw IoError(path.string() + " is not a PLY file");
    std::vector<PlyProperty> props;
    std::size_t rows = 0;
    bool in_vertex = false;
    bool seen_vertex = false;
    bool binary_le = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "end_header") break;
        if (key == "format") {
            std::string fmt;
            ls >> fmt;
            binary_le = fmt == "binary_little_endian";
        } else if (key == "element") {
            std::string name;
            std::size_t count = 0;
            ls >> name >> count;
            if (name == "vertex") {
                in_vertex = true;
                seen_vertex = true;
                rows = count;
            } else {
                if (!seen_vertex) {
                    throw IoError(path.string() + ": element '" + name + "' precedes vertex");
                }
                in_vertex = false;
            }
        } else if (key == "property" && in_vertex) {
            std::string type, name;
            ls >> type;
            if (type == "list") throw IoError(path.string() + ": list vertex properties unsupported");
            ls >> name;
            PlyProperty p;
            p.name = name;
            if (!parse_type(type, p.type)) {
                throw IoError(path.string() + ": unknown property type '" + type + "'");
            }
            props.push_back(p);
        }
    }
    if (!binary_le) throw IoError(path.string() + ": only binary_little_endian PLY is supported");
    if (!seen_vertex) throw IoError(path.string() + ": no vertex element");
    PlyTable table(std::move(props), rows);
    in.read(reinterpret_cast<char*>(table.bytes().data()),
            static_cast<std::streamsize>(table.bytes().size()));
    if (!in && table.bytes().size() > 0) throw IoError(path.string() + ": truncated vertex data");
    return table;
}

} // namespace dynscene::io
