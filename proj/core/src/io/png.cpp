// Copyright Contributors to the dynscene project
// SPDX-License-Identifier: Apache-2.0
#include "dynscene/io/png.hpp"

#include "dynscene/errors.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace dynscene::io {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Keeps libpng quiet; the message is reported through the thrown IoError.
void on_png_error(png_structp png, png_const_charp message) {
    auto* sink = static_cast<std::string*>(png_get_error_ptr(png));
    if (sink) *sink = message;
    png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.string().c_str(), mode));
    if (!f) throw IoError("cannot open " + path.string());
    return f;
}

void write_rows(const std::filesystem::path& path, int width, int height, int color_type,
                const std::vector<png_bytep>& rows) {
    FilePtr file = open_file(path, "wb");
    std::string message;
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialisation failed for " + path.string());
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed writing PNG " + path.string() + ": " + message);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 3);
    png_write_info(png, info);
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// Decodes any PNG to 8-bit RGB or 8-bit gray.
std::vector<std::uint8_t> read_pixels(const std::filesystem::path& path, bool gray, int& width,
                                      int& height) {
    FilePtr file = open_file(path, "rb");
    png_byte header[8];
    if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) {
        throw IoError(path.string() + " is not a PNG file");
    }
    std::string message;
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialisation failed for " + path.string());
    }
    std::vector<std::uint8_t> pixels;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("corrupt PNG " + path.string() + ": " + message);
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    const bool is_gray = color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA;
    if (gray && !is_gray) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    if (!gray && is_gray) png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    const std::size_t stride = png_get_rowbytes(png, info);
    const std::size_t channels = gray ? 1 : 3;
    if (stride != static_cast<std::size_t>(width) * channels) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("unsupported PNG layout in " + path.string());
    }
    pixels.resize(stride * static_cast<std::size_t>(height));
    rows.resize(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) rows[y] = pixels.data() + stride * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return pixels;
}

} // namespace

void write_png(const std::filesystem::path& path, const RgbImage& image) {
    static_assert(sizeof(Rgb) == 3);
    std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
    auto* base = reinterpret_cast<const png_byte*>(image.pixels().data());
    for (int y = 0; y < image.height(); ++y) {
        rows[y] = const_cast<png_bytep>(base + static_cast<std::size_t>(y) * image.width() * 3);
    }
    write_rows(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, rows);
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
    int w = 0, h = 0;
    const auto pixels = read_pixels(path, false, w, h);
    RgbImage image(w, h);
    for (std::size_t i = 0; i < image.size(); ++i) {
        image[i] = {pixels[3 * i], pixels[3 * i + 1], pixels[3 * i + 2]};
    }
    return image;
}

void write_mask_png(const std::filesystem::path& path, const Mask& mask) {
    std::vector<std::uint8_t> gray(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) gray[i] = mask[i] ? 255 : 0;
    std::vector<png_bytep> rows(static_cast<std::size_t>(mask.height()));
    for (int y = 0; y < mask.height(); ++y) {
        rows[y] = gray.data() + static_cast<std::size_t>(y) * mask.width();
    }
    write_rows(path, mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, rows);
}

Mask read_mask_png(const std::filesystem::path& path) {
    int w = 0, h = 0;
    const auto pixels = read_pixels(path, true, w, h);
    Mask mask(w, h);
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = pixels[i] >= 128 ? 1 : 0;
    return mask;
}

} // namespace dynscene::io
