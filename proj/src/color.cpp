#include "dscnet/color.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace dscnet::color {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

// Linear sRGB -> XYZ (scaled so Y of white is 1).
constexpr Mat3 kRgbToXyz{{{0.4124564, 0.3575761, 0.1804375},
                          {0.2126729, 0.7151522, 0.0721750},
                          {0.0193339, 0.1191920, 0.9503041}}};

Mat3 invert(const Mat3& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  Mat3 inv{};
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return inv;
}

const Mat3& xyz_to_rgb() {
  static const Mat3 inv = invert(kRgbToXyz);
  return inv;
}

constexpr double kEpsilon = 216.0 / 24389.0;
constexpr double kKappa = 24389.0 / 27.0;

double lab_f(double t) { return t > kEpsilon ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0; }

double lab_f_inv(double f) {
  const double f3 = f * f * f;
  return f3 > kEpsilon ? f3 : (116.0 * f - 16.0) / kKappa;
}

ImageF map_pixels(const ImageF& in, auto&& fn) {
  if (in.channels != 3) throw std::invalid_argument("color conversion needs a 3-channel image");
  ImageF out(in.width, in.height, 3);
  for (std::size_t i = 0; i < in.pixel_count(); ++i) {
    const auto r = fn(in.values[3 * i], in.values[3 * i + 1], in.values[3 * i + 2]);
    out.values[3 * i] = r[0];
    out.values[3 * i + 1] = r[1];
    out.values[3 * i + 2] = r[2];
  }
  return out;
}

}  // namespace

double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double v) {
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

Lab rgb_to_lab(Rgb rgb) {
  const std::array<double, 3> lin{srgb_to_linear(std::clamp(rgb.r, 0.0, 255.0) / 255.0),
                                  srgb_to_linear(std::clamp(rgb.g, 0.0, 255.0) / 255.0),
                                  srgb_to_linear(std::clamp(rgb.b, 0.0, 255.0) / 255.0)};
  std::array<double, 3> xyz{};
  for (int i = 0; i < 3; ++i) {
    xyz[i] = 100.0 * (kRgbToXyz[i][0] * lin[0] + kRgbToXyz[i][1] * lin[1] + kRgbToXyz[i][2] * lin[2]);
  }
  const double fx = lab_f(xyz[0] / kWhiteX);
  const double fy = lab_f(xyz[1] / kWhiteY);
  const double fz = lab_f(xyz[2] / kWhiteZ);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Rgb lab_to_rgb(Lab lab) {
  const double fy = (lab.l + 16.0) / 116.0;
  const double fx = fy + lab.a / 500.0;
  const double fz = fy - lab.b / 200.0;
  const std::array<double, 3> xyz{kWhiteX * lab_f_inv(fx) / 100.0, kWhiteY * lab_f_inv(fy) / 100.0,
                                  kWhiteZ * lab_f_inv(fz) / 100.0};
  const Mat3& m = xyz_to_rgb();
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) {
    const double lin = m[i][0] * xyz[0] + m[i][1] * xyz[1] + m[i][2] * xyz[2];
    out[i] = 255.0 * linear_to_srgb(std::clamp(lin, 0.0, 1.0));
  }
  return {std::clamp(out[0], 0.0, 255.0), std::clamp(out[1], 0.0, 255.0),
          std::clamp(out[2], 0.0, 255.0)};
}

ImageF rgb_to_lab(const ImageF& rgb) {
  return map_pixels(rgb, [](double r, double g, double b) {
    const Lab lab = rgb_to_lab(Rgb{r, g, b});
    return std::array<double, 3>{lab.l, lab.a, lab.b};
  });
}

ImageF lab_to_rgb(const ImageF& lab) {
  return map_pixels(lab, [](double l, double a, double b) {
    const Rgb rgb = lab_to_rgb(Lab{l, a, b});
    return std::array<double, 3>{rgb.r, rgb.g, rgb.b};
  });
}

}  // namespace dscnet::color
