#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>

#include "dscnet/image.hpp"

namespace dscnet {

class DegenerateRegionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Affine color map out = M * (r, g, b, 1), M stored row-major 3x4.
struct TransferMatrix {
  std::array<double, 12> m{};
  double residual = 0.0;  // mean over fitted pixels of |I_s - T(I_n)|^2
  std::size_t sample_count = 0;

  static TransferMatrix identity();
  double& operator()(std::size_t row, std::size_t col) { return m[row * 4 + col]; }
  double operator()(std::size_t row, std::size_t col) const { return m[row * 4 + col]; }
  std::array<double, 3> apply(double r, double g, double b) const;
};

/// Least-squares fit of the map taking shadow_free onto shadow over the
/// pixels where `nonshadow` is non-zero. Solved by Householder QR.
/// Throws DegenerateRegionError for an empty or rank-deficient region.
TransferMatrix fit_transfer(const ImageF& shadow, const ImageF& shadow_free,
                            const Image8& nonshadow);

/// Maps every pixel of `image` and clamps to [0, 255].
ImageF apply_transfer(const ImageF& image, const TransferMatrix& t);

/// Mean over the region of |shadow - T(shadow_free)|^2 (no clamping).
double transfer_error(const ImageF& shadow, const ImageF& shadow_free, const Image8& region,
                      const TransferMatrix& t);

}  // namespace dscnet
