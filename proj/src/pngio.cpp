#include "lnet/pngio.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace lnet {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode)
{
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return f;
}

void write_png(const std::filesystem::path& path, const std::uint8_t* data, int width, int height, int color_type,
               int channels)
{
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng initialization failed for " + path.string());
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("failed writing PNG " + path.string());
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y) {
        png_write_row(png, const_cast<png_bytep>(data + static_cast<std::size_t>(y) * width * channels));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(f.get()) != 0) {
        throw std::runtime_error("failed writing PNG " + path.string());
    }
}

} // namespace

void write_gray_png(const std::filesystem::path& path, const Eigen::Ref<const RowMatrixXd>& image)
{
    const int h = static_cast<int>(image.rows());
    const int w = static_cast<int>(image.cols());
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double v = std::clamp(image(y, x), 0.0, 1.0);
            bytes[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint8_t>(std::lround(v * 255.0));
        }
    }
    write_png(path, bytes.data(), w, h, PNG_COLOR_TYPE_GRAY, 1);
}

void write_rgb_png(const std::filesystem::path& path, const std::vector<std::uint8_t>& rgb, int width, int height)
{
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
        throw std::invalid_argument("write_rgb_png: buffer size does not match dimensions");
    }
    write_png(path, rgb.data(), width, height, PNG_COLOR_TYPE_RGB, 3);
}

namespace {

// Errors are reported through the exception below, not libpng's stderr output.
void quiet_error(png_structp png, png_const_charp) { png_longjmp(png, 1); }
void quiet_warning(png_structp, png_const_charp) {}

} // namespace

RowMatrixXd read_gray_png(const std::filesystem::path& path)
{
    FilePtr f = open_file(path, "rb");
    png_byte sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw std::runtime_error("not a PNG file: " + path.string());
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, quiet_error, quiet_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("libpng initialization failed for " + path.string());
    }
    RowMatrixXd image;
    std::vector<png_byte> row;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("corrupt or truncated PNG " + path.string());
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    const auto w = png_get_image_width(png, info);
    const auto h = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color != PNG_COLOR_TYPE_GRAY || depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("expected 8-bit grayscale PNG: " + path.string());
    }
    image.resize(h, w);
    row.resize(w);
    for (png_uint_32 y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 x = 0; x < w; ++x) {
            image(y, x) = row[x] / 255.0;
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

} // namespace lnet
