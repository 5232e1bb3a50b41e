#include "spotscan/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <stdexcept>

namespace spotscan {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error("png: " + what + ": " + path);
}

}  // namespace

SrgbRaster load_page(const std::string& path, int dpi) {
    if (dpi <= 0) throw std::runtime_error("png: dpi must be positive");
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) fail(path, "cannot open file");

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
        fail(path, "not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(path, "png_create_info_struct failed");
    }

    std::vector<png_bytep> row_ptrs;
    std::vector<png_byte> data;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "decode error");
    }

    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    if (bit_depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "unsupported bit depth " + std::to_string(bit_depth) + " (need 8)");
    }
    if (color_type != PNG_COLOR_TYPE_RGB && color_type != PNG_COLOR_TYPE_RGB_ALPHA) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "unsupported color type (need 8-bit RGB or RGBA)");
    }
    const bool has_alpha = color_type == PNG_COLOR_TYPE_RGB_ALPHA;
    const size_t channels = has_alpha ? 4 : 3;

    data.resize(static_cast<size_t>(w) * h * channels);
    row_ptrs.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) row_ptrs[y] = &data[static_cast<size_t>(y) * w * channels];
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    SrgbRaster out = SrgbRaster::make(static_cast<int>(w), static_cast<int>(h), dpi);
    for (size_t p = 0, n = static_cast<size_t>(w) * h; p < n; ++p) {
        const png_byte* src = &data[p * channels];
        out.pixels[p * 3 + 0] = src[0];
        out.pixels[p * 3 + 1] = src[1];
        out.pixels[p * 3 + 2] = src[2];
        out.validity[p] = has_alpha ? (src[3] != 0 ? 1 : 0) : 1;
    }
    return out;
}

void save_page(const SrgbRaster& raster, const std::string& path) {
    if (raster.empty()) throw std::runtime_error("png: cannot save empty raster: " + path);
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) fail(path, "cannot open file for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(path, "png_create_info_struct failed");
    }

    std::vector<png_byte> data;
    std::vector<png_bytep> row_ptrs;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(path, "encode error");
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, raster.width, raster.height, 8, PNG_COLOR_TYPE_RGB_ALPHA,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const size_t n = static_cast<size_t>(raster.width) * raster.height;
    data.resize(n * 4);
    for (size_t p = 0; p < n; ++p) {
        data[p * 4 + 0] = raster.pixels[p * 3 + 0];
        data[p * 4 + 1] = raster.pixels[p * 3 + 1];
        data[p * 4 + 2] = raster.pixels[p * 3 + 2];
        data[p * 4 + 3] = raster.validity[p] ? 255 : 0;
    }
    row_ptrs.resize(raster.height);
    for (int y = 0; y < raster.height; ++y)
        row_ptrs[y] = &data[static_cast<size_t>(y) * raster.width * 4];
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace spotscan
