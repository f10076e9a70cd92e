#include "dscnet/color_transfer.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace dscnet {

TransferMatrix TransferMatrix::identity() {
  TransferMatrix t;
  t(0, 0) = t(1, 1) = t(2, 2) = 1.0;
  return t;
}

std::array<double, 3> TransferMatrix::apply(double r, double g, double b) const {
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) out[i] = m[i * 4] * r + m[i * 4 + 1] * g + m[i * 4 + 2] * b + m[i * 4 + 3];
  return out;
}

namespace {

void check_inputs(const ImageF& shadow, const ImageF& shadow_free, const Image8& region) {
  require_same_size(shadow, shadow_free, "color transfer");
  if (shadow.channels != 3) throw ShapeError("color transfer needs 3-channel images");
  if (!region.same_size(shadow) || region.channels != 1) {
    throw ShapeError("color transfer: mask does not match the images");
  }
}

}  // namespace

TransferMatrix fit_transfer(const ImageF& shadow, const ImageF& shadow_free,
                            const Image8& nonshadow) {
  check_inputs(shadow, shadow_free, nonshadow);
  constexpr std::size_t kCols = 4, kRhs = 3;

  // Column-major design matrix A (n x 4) and right-hand sides B (n x 3).
  std::vector<std::size_t> pixels;
  for (std::size_t i = 0; i < nonshadow.values.size(); ++i) {
    if (nonshadow.values[i]) pixels.push_back(i);
  }
  const std::size_t n = pixels.size();
  if (n == 0) throw DegenerateRegionError("fit_transfer: non-shadow region is empty");
  if (n < kCols) {
    throw DegenerateRegionError("fit_transfer: need at least 4 non-shadow pixels, got " +
                                std::to_string(n));
  }
  std::vector<double> a(n * kCols), b(n * kRhs);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t p = pixels[k];
    for (std::size_t c = 0; c < 3; ++c) {
      a[c * n + k] = shadow_free.values[3 * p + c];
      b[c * n + k] = shadow.values[3 * p + c];
    }
    a[3 * n + k] = 1.0;
  }

  // Householder QR, applying each reflector to the remaining columns and B.
  std::vector<double> diag(kCols);
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  for (std::size_t j = 0; j < kCols; ++j) {
    double* col = a.data() + j * n;
    double norm = 0.0;
    for (std::size_t i = j; i < n; ++i) norm += col[i] * col[i];
    norm = std::sqrt(norm);
    if (norm <= 1e-10 * scale * std::sqrt(static_cast<double>(n))) {
      throw DegenerateRegionError(
          "fit_transfer: non-shadow colors are rank deficient (column " + std::to_string(j) +
          "); the region needs colors that span an affine 3-D space");
    }
    const double alpha = col[j] > 0 ? -norm : norm;
    // v = x - alpha e_j, stored in place; R_jj = alpha.
    col[j] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = j; i < n; ++i) vnorm2 += col[i] * col[i];
    auto reflect = [&](double* target) {
      double dot = 0.0;
      for (std::size_t i = j; i < n; ++i) dot += col[i] * target[i];
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = j; i < n; ++i) target[i] -= f * col[i];
    };
    for (std::size_t k = j + 1; k < kCols; ++k) reflect(a.data() + k * n);
    for (std::size_t k = 0; k < kRhs; ++k) reflect(b.data() + k * n);
    diag[j] = alpha;
    if (std::abs(alpha) <= 1e-10 * std::abs(diag[0])) {
      throw DegenerateRegionError("fit_transfer: non-shadow colors are rank deficient");
    }
  }

  // Back substitution R x = (Q^T b)[0:4] for each output channel.
  TransferMatrix t;
  for (std::size_t c = 0; c < kRhs; ++c) {
    std::array<double, kCols> x{};
    for (std::size_t jj = kCols; jj-- > 0;) {
      double s = b[c * n + jj];
      for (std::size_t k = jj + 1; k < kCols; ++k) s -= a[k * n + jj] * x[k];
      x[jj] = s / diag[jj];
    }
    for (std::size_t k = 0; k < kCols; ++k) t(c, k) = x[k];
  }
  t.sample_count = n;
  t.residual = transfer_error(shadow, shadow_free, nonshadow, t);
  return t;
}

ImageF apply_transfer(const ImageF& image, const TransferMatrix& t) {
  if (image.channels != 3) throw ShapeError("apply_transfer needs a 3-channel image");
  ImageF out(image.width, image.height, 3);
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    const auto v = t.apply(image.values[3 * i], image.values[3 * i + 1], image.values[3 * i + 2]);
    for (std::size_t c = 0; c < 3; ++c) out.values[3 * i + c] = std::clamp(v[c], 0.0, 255.0);
  }
  return out;
}

double transfer_error(const ImageF& shadow, const ImageF& shadow_free, const Image8& region,
                      const TransferMatrix& t) {
  check_inputs(shadow, shadow_free, region);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < region.values.size(); ++i) {
    if (!region.values[i]) continue;
    const auto v = t.apply(shadow_free.values[3 * i], shadow_free.values[3 * i + 1],
                           shadow_free.values[3 * i + 2]);
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = shadow.values[3 * i + c] - v[c];
      sum += d * d;
    }
    ++n;
  }
  if (n == 0) throw DegenerateRegionError("transfer_error: region is empty");
  return sum / static_cast<double>(n);
}

}  // namespace dscnet
