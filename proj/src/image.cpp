#include "dscnet/image.hpp"

#include <algorithm>
#include <cmath>

namespace dscnet {

ImageF to_float(const Image8& image) {
  ImageF out(image.width, image.height, image.channels);
  std::transform(image.values.begin(), image.values.end(), out.values.begin(),
                 [](std::uint8_t v) { return static_cast<double>(v); });
  return out;
}

Image8 quantize(const ImageF& image) {
  Image8 out(image.width, image.height, image.channels);
  std::transform(image.values.begin(), image.values.end(), out.values.begin(), [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
  });
  return out;
}

bool is_binary_mask(const Image8& mask) {
  return mask.channels == 1 &&
         std::all_of(mask.values.begin(), mask.values.end(), [](std::uint8_t v) { return v <= 1; });
}

Image8 invert_mask(const Image8& mask) {
  Image8 out = mask;
  for (auto& v : out.values) v = v ? 0 : 1;
  return out;
}

std::size_t count_set(const Image8& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.values.begin(), mask.values.end(), [](std::uint8_t v) { return v != 0; }));
}

namespace {

template <typename T>
Tensor raster_to_tensor(const Raster<T>& image, double scale, double offset) {
  Tensor t(Shape{1, image.channels, image.height, image.width});
  for (std::size_t c = 0; c < image.channels; ++c) {
    for (std::size_t y = 0; y < image.height; ++y) {
      for (std::size_t x = 0; x < image.width; ++x) {
        t.at(0, c, y, x) = static_cast<double>(image.at(x, y, c)) * scale + offset;
      }
    }
  }
  return t;
}

}  // namespace

Tensor to_tensor(const ImageF& image, double scale, double offset) {
  return raster_to_tensor(image, scale, offset);
}

Tensor to_tensor(const Image8& image, double scale, double offset) {
  return raster_to_tensor(image, scale, offset);
}

ImageF to_image(const Tensor& t, std::size_t batch_index) {
  require_rank4(t, "to_image");
  ImageF out(t.dim(3), t.dim(2), t.dim(1));
  for (std::size_t c = 0; c < out.channels; ++c) {
    for (std::size_t y = 0; y < out.height; ++y) {
      for (std::size_t x = 0; x < out.width; ++x) out.at(x, y, c) = t.at(batch_index, c, y, x);
    }
  }
  return out;
}

void require_same_size(const ImageF& a, const ImageF& b, const std::string& what) {
  if (!a.same_size(b) || a.channels != b.channels) {
    throw ShapeError(what + ": image sizes differ (" + std::to_string(a.width) + "x" +
                     std::to_string(a.height) + "x" + std::to_string(a.channels) + " vs " +
                     std::to_string(b.width) + "x" + std::to_string(b.height) + "x" +
                     std::to_string(b.channels) + ")");
  }
}

}  // namespace dscnet
