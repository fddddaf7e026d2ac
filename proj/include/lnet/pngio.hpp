#ifndef LNET_PNGIO_HPP
#define LNET_PNGIO_HPP

#include "lnet/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace lnet {

/// 8-bit grayscale PNG. Values are clamped to [0, 1] and rounded to the nearest level.
void write_gray_png(const std::filesystem::path& path, const Eigen::Ref<const RowMatrixXd>& image);

/// Dequantized to [0, 1]. Throws std::runtime_error naming the file on any failure.
RowMatrixXd read_gray_png(const std::filesystem::path& path);

/// 8-bit RGB PNG from a row-major (h, w, 3) byte buffer.
void write_rgb_png(const std::filesystem::path& path, const std::vector<std::uint8_t>& rgb, int width, int height);

} // namespace lnet

#endif // LNET_PNGIO_HPP
