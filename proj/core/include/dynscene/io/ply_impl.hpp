// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstring>

namespace dynscene::io {

template <typename T>
void PlyTable::set(std::size_t row, std::size_t col, T value) {
    std::uint8_t* dst = data_.data() + row * stride_ + offsets_[col];
    switch (properties_[col].type) {
    case PlyType::int8: { auto v = static_cast<std::int8_t>(value); std::memcpy(dst, &v, 1); break; }
    case PlyType::uint8: { auto v = static_cast<std::uint8_t>(value); std::memcpy(dst, &v, 1); break; }
    case PlyType::int16: { auto v = static_cast<std::int16_t>(value); std::memcpy(dst, &v, 2); break; }
    case PlyType::uint16: { auto v = static_cast<std::uint16_t>(value); std::memcpy(dst, &v, 2); break; }
    case PlyType::int32: { auto v = static_cast<std::int32_t>(value); std::memcpy(dst, &v, 4); break; }
    case PlyType::uint32: { auto v = static_cast<std::uint32_t>(value); std::memcpy(dst, &v, 4); break; }
    case PlyType::float32: { auto v = static_cast<float>(value); std::memcpy(dst, &v, 4); break; }
    case PlyType::float64: { auto v = static_cast<double>(value); std::memcpy(dst, &v, 8); break; }
    }
}

} // namespace dynscene::io
