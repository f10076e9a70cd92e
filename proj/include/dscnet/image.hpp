#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dscnet/tensor.hpp"

namespace dscnet {

/// Interleaved raster, row-major, `channels` values per pixel.
template <typename T>
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<T> values;

  Raster() = default;
  Raster(std::size_t w, std::size_t h, std::size_t c, T fill = T{})
      : width(w), height(h), channels(c), values(w * h * c, fill) {}

  std::size_t pixel_count() const { return width * height; }
  bool empty() const { return values.empty(); }

  T& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return values[(y * width + x) * channels + c];
  }
  const T& at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return values[(y * width + x) * channels + c];
  }

  template <typename U>
  bool same_size(const Raster<U>& other) const {
    return width == other.width && height == other.height;
  }

  friend bool operator==(const Raster&, const Raster&) = default;
};

using Image8 = Raster<std::uint8_t>;  // 8-bit color, or a 1-channel 0/1 mask
using ImageF = Raster<double>;

ImageF to_float(const Image8& image);
/// Rounds to nearest and clamps to [0, 255].
Image8 quantize(const ImageF& image);

bool is_binary_mask(const Image8& mask);
/// 1 where the mask is 0 and vice versa.
Image8 invert_mask(const Image8& mask);
std::size_t count_set(const Image8& mask);

/// [1, C, H, W] tensor holding `image * scale + offset`.
Tensor to_tensor(const ImageF& image, double scale = 1.0, double offset = 0.0);
Tensor to_tensor(const Image8& image, double scale = 1.0, double offset = 0.0);
ImageF to_image(const Tensor& t, std::size_t batch_index = 0);

void require_same_size(const ImageF& a, const ImageF& b, const std::string& what);

}  // namespace dscnet
