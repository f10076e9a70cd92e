#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dscnet/scene.hpp"

namespace dscnet {

enum class ShapeFamily { rectangle, ellipse, polygon };
enum class Texture { flat, gradient, checker };

std::string to_string(ShapeFamily s);
std::string to_string(Texture t);
ShapeFamily parse_shape_family(const std::string& s);
Texture parse_texture(const std::string& s);

struct SynthConfig {
  std::size_t resolution = 64;
  std::size_t count = 200;
  std::size_t first_index = 0;
  std::vector<ShapeFamily> shapes{ShapeFamily::rectangle, ShapeFamily::ellipse, ShapeFamily::polygon};
  double attenuation_min = 0.3;  // multiplicative darkening in linear RGB
  double attenuation_max = 0.7;
  double soft_edge = 2.0;        // ramp width in pixels
  std::vector<Texture> textures{Texture::flat, Texture::gradient, Texture::checker};
  /// Passes the stored shadow-free copy through a random affine color map.
  bool perturb = false;
  double perturb_gain = 0.15;    // diagonal gains drawn from 1 +- gain
  double perturb_mix = 0.05;     // off-diagonal entries drawn from +- mix
  double perturb_bias = 12.0;    // offsets drawn from +- bias
  double noise = 0.0;            // Gaussian sensor noise sd on the clean background, 8-bit units
  std::uint64_t seed = 7;

  void validate() const;
};

struct SceneInfo {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  ShapeFamily shape = ShapeFamily::rectangle;
  Texture texture = Texture::flat;
  double attenuation = 1.0;
  /// Planted 3x4 map (row-major) applied to the stored shadow-free image.
  std::optional<std::array<double, 12>> perturbation;
};

struct GeneratedScene {
  LabeledScene scene;
  SceneInfo info;
};

std::string scene_id(std::size_t index);

/// Deterministic in (cfg.seed, index).
GeneratedScene generate_scene(const SynthConfig& cfg, std::size_t index);

}  // namespace dscnet
