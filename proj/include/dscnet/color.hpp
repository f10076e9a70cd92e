#pragma once

#include "dscnet/image.hpp"

// sRGB <-> CIE L*a*b* under the D65 white point.
namespace dscnet::color {

struct Rgb {
  double r, g, b;  // [0, 255]
};

struct Lab {
  double l, a, b;
};

inline constexpr double kWhiteX = 95.047;
inline constexpr double kWhiteY = 100.0;
inline constexpr double kWhiteZ = 108.883;

double srgb_to_linear(double v);  // both in [0, 1]
double linear_to_srgb(double v);

Lab rgb_to_lab(Rgb rgb);
/// Out-of-gamut results are clamped to [0, 255].
Rgb lab_to_rgb(Lab lab);

ImageF rgb_to_lab(const ImageF& rgb);
ImageF lab_to_rgb(const ImageF& lab);

}  // namespace dscnet::color
