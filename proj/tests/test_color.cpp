#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dscnet/color.hpp"
#include "dscnet/color_transfer.hpp"
#include "support/test_support.hpp"

using namespace dscnet;
using namespace dscnet::testing;

namespace {

ImageF random_image(std::size_t w, std::size_t h, Rng& rng, double lo = 0.0, double hi = 255.0) {
  ImageF img(w, h, 3);
  for (double& v : img.values) v = rng.uniform(lo, hi);
  return img;
}

TransferMatrix random_transfer(Rng& rng) {
  TransferMatrix t;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 4; ++c) t(r, c) = (r == c ? 0.7 : 0.0) + rng.uniform(-0.2, 0.2);
  for (std::size_t r = 0; r < 3; ++r) t(r, 3) = rng.uniform(-20.0, 20.0);
  return t;
}

// Unclamped application, for building exact synthetic pairs.
ImageF map_exact(const ImageF& img, const TransferMatrix& t) {
  ImageF out = img;
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const auto v = t.apply(img.values[3 * i], img.values[3 * i + 1], img.values[3 * i + 2]);
    for (std::size_t k = 0; k < 3; ++k) out.values[3 * i + k] = v[k];
  }
  return out;
}

// Solves the normal equations (A^T A) x = A^T b by Gaussian elimination
// with partial pivoting, in long double.
std::array<double, 12> normal_equations(const ImageF& target, const ImageF& source, const Image8& region) {
  long double ata[4][4] = {}, atb[4][3] = {};
  for (std::size_t i = 0; i < source.pixel_count(); ++i) {
    if (!region.values[i]) continue;
    const long double a[4] = {source.values[3 * i], source.values[3 * i + 1], source.values[3 * i + 2], 1.0L};
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) ata[r][c] += a[r] * a[c];
      for (int k = 0; k < 3; ++k) atb[r][k] += a[r] * target.values[3 * i + static_cast<std::size_t>(k)];
    }
  }
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::fabs(ata[r][col]) > std::fabs(ata[pivot][col])) pivot = r;
    std::swap(ata[col], ata[pivot]);
    std::swap(atb[col], atb[pivot]);
    for (int r = col + 1; r < 4; ++r) {
      const long double f = ata[r][col] / ata[col][col];
      for (int c = col; c < 4; ++c) ata[r][c] -= f * ata[col][c];
      for (int k = 0; k < 3; ++k) atb[r][k] -= f * atb[col][k];
    }
  }
  long double x[4][3];
  for (int r = 3; r >= 0; --r)
    for (int k = 0; k < 3; ++k) {
      long double s = atb[r][k];
      for (int c = r + 1; c < 4; ++c) s -= ata[r][c] * x[c][k];
      x[r][k] = s / ata[r][r];
    }
  std::array<double, 12> m{};
  for (int k = 0; k < 3; ++k)
    for (int c = 0; c < 4; ++c) m[static_cast<std::size_t>(k * 4 + c)] = static_cast<double>(x[c][k]);
  return m;
}

}  // namespace

TEST_CASE("reference white and black") {
  const color::Lab white = color::rgb_to_lab(color::Rgb{255, 255, 255});
  CHECK(std::abs(white.l - 100.0) <= 0.01);
  CHECK(std::abs(white.a) <= 0.01);
  CHECK(std::abs(white.b) <= 0.01);
  const color::Lab black = color::rgb_to_lab(color::Rgb{0, 0, 0});
  CHECK(std::abs(black.l) <= 1e-12);
  const color::Rgb back = color::lab_to_rgb(color::Lab{100.0, 0.0, 0.0});
  CHECK(std::abs(back.r - 255.0) <= 0.01);
  CHECK(std::abs(back.g - 255.0) <= 0.01);
  CHECK(std::abs(back.b - 255.0) <= 0.01);
}

TEST_CASE("known sRGB primaries") {
  const color::Lab red = color::rgb_to_lab(color::Rgb{255, 0, 0});
  CHECK(red.l == doctest::Approx(53.24).epsilon(1e-3));
  CHECK(red.a == doctest::Approx(80.09).epsilon(1e-3));
  CHECK(red.b == doctest::Approx(67.20).epsilon(1e-3));
  const color::Lab mid = color::rgb_to_lab(color::Rgb{128, 128, 128});
  CHECK(mid.l == doctest::Approx(53.59).epsilon(1e-3));
}

TEST_CASE("gamma curves invert each other") {
  for (int i = 0; i <= 1000; ++i) {
    const double v = i / 1000.0;
    CHECK(std::abs(color::linear_to_srgb(color::srgb_to_linear(v)) - v) <= 1e-12);
  }
}

TEST_CASE("RGB to LAB round trip on random colors") {
  Rng rng(1);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const color::Rgb c{rng.uniform(0.0, 255.0), rng.uniform(0.0, 255.0), rng.uniform(0.0, 255.0)};
    const color::Rgb r = color::lab_to_rgb(color::rgb_to_lab(c));
    worst = std::max({worst, std::abs(r.r - c.r), std::abs(r.g - c.g), std::abs(r.b - c.b)});
  }
  CHECK(worst <= 0.5 / 255.0);
}

TEST_CASE("image conversions and gamut clamping") {
  Rng rng(2);
  const ImageF img = random_image(5, 4, rng);
  const ImageF lab = color::rgb_to_lab(img);
  CHECK(lab.same_size(img));
  const color::Lab p = color::rgb_to_lab(color::Rgb{img.values[3], img.values[4], img.values[5]});
  CHECK(lab.values[3] == p.l);
  const color::Rgb out = color::lab_to_rgb(color::Lab{50.0, 200.0, -200.0});
  for (double v : {out.r, out.g, out.b}) CHECK((v >= 0.0 && v <= 255.0));
  ImageF gray(2, 2, 1);
  CHECK_THROWS(color::rgb_to_lab(gray));
}

TEST_CASE("identical pairs give the identity transfer") {
  Rng rng(3);
  const ImageF img = random_image(8, 8, rng);
  const Image8 region = random_mask(8, 8, rng, 0.5);
  const TransferMatrix t = fit_transfer(img, img, region);
  const TransferMatrix id = TransferMatrix::identity();
  for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(t.m[i] - id.m[i]) <= 1e-9);
  CHECK(t.residual <= 1e-18);
  CHECK(t.sample_count == count_set(region));
}

TEST_CASE("planted affine maps are recovered exactly") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const ImageF free = random_image(12, 10, rng);
    const TransferMatrix planted = random_transfer(rng);
    const ImageF shadow = map_exact(free, planted);
    const Image8 region = random_mask(12, 10, rng, 0.6);
    const TransferMatrix t = fit_transfer(shadow, free, region);
    double err = 0.0;
    for (std::size_t i = 0; i < 12; ++i) err = std::max(err, std::abs(t.m[i] - planted.m[i]));
    CHECK(err < 1e-6);
    CHECK(t.residual < 1e-10);
  }
}

TEST_CASE("noisy fits agree with the normal equations") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const ImageF free = random_image(10, 10, rng);
    ImageF shadow = map_exact(free, random_transfer(rng));
    for (double& v : shadow.values) v += rng.normal(0.0, 3.0);
    const Image8 region = random_mask(10, 10, rng, 0.5);
    const TransferMatrix t = fit_transfer(shadow, free, region);
    const auto oracle = normal_equations(shadow, free, region);
    for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(t.m[i] - oracle[i]) <= 1e-9 * std::max(1.0, std::abs(oracle[i])));
    CHECK(t.residual == doctest::Approx(transfer_error(shadow, free, region, t)).epsilon(1e-12));
  }
}

TEST_CASE("least squares never loses to the identity map") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const ImageF free = random_image(6, 6, rng);
    const ImageF shadow = random_image(6, 6, rng);
    Image8 region = random_mask(6, 6, rng, 0.7);
    if (count_set(region) < 8) continue;
    const TransferMatrix t = fit_transfer(shadow, free, region);
    CHECK(t.residual <= transfer_error(shadow, free, region, TransferMatrix::identity()) + 1e-9);
  }
}

TEST_CASE("apply_transfer maps, clamps and is linear in the input") {
  TransferMatrix t = TransferMatrix::identity();
  t(0, 0) = 2.0;
  t(1, 3) = -10.0;
  ImageF img(2, 1, 3);
  img.values = {100.0, 5.0, 7.0, 200.0, 50.0, 9.0};
  const ImageF out = apply_transfer(img, t);
  CHECK(out.values == std::vector<double>{200.0, 0.0, 7.0, 255.0, 40.0, 9.0});
  Rng rng(7);
  const TransferMatrix r = random_transfer(rng);
  const auto a = r.apply(10, 20, 30), b = r.apply(40, 50, 60), mid = r.apply(25, 35, 45);
  for (std::size_t k = 0; k < 3; ++k) CHECK(mid[k] == doctest::Approx(0.5 * (a[k] + b[k])).epsilon(1e-14));
}

TEST_CASE("degenerate regions are rejected") {
  Rng rng(8);
  const ImageF img = random_image(6, 6, rng);
  CHECK_THROWS_AS(fit_transfer(img, img, Image8(6, 6, 1, 0)), DegenerateRegionError);
  Image8 three(6, 6, 1, 0);
  three.values[0] = three.values[1] = three.values[2] = 1;
  CHECK_THROWS_AS(fit_transfer(img, img, three), DegenerateRegionError);
  const ImageF flat(6, 6, 3, 128.0);
  CHECK_THROWS_AS(fit_transfer(img, flat, Image8(6, 6, 1, 1)), DegenerateRegionError);
  ImageF gray = img;
  for (std::size_t i = 0; i < gray.pixel_count(); ++i) gray.values[3 * i + 1] = gray.values[3 * i + 2] = gray.values[3 * i];
  CHECK_THROWS_AS(fit_transfer(img, gray, Image8(6, 6, 1, 1)), DegenerateRegionError);
  CHECK_THROWS(fit_transfer(img, random_image(5, 6, rng), Image8(6, 6, 1, 1)));
}
