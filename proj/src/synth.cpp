#include "dscnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "dscnet/color.hpp"
#include "dscnet/random.hpp"

namespace dscnet {

std::string to_string(ShapeFamily s) {
  switch (s) {
    case ShapeFamily::rectangle: return "rectangle";
    case ShapeFamily::ellipse: return "ellipse";
    case ShapeFamily::polygon: return "polygon";
  }
  return "?";
}

std::string to_string(Texture t) {
  switch (t) {
    case Texture::flat: return "flat";
    case Texture::gradient: return "gradient";
    case Texture::checker: return "checker";
  }
  return "?";
}

ShapeFamily parse_shape_family(const std::string& s) {
  if (s == "rectangle") return ShapeFamily::rectangle;
  if (s == "ellipse") return ShapeFamily::ellipse;
  if (s == "polygon") return ShapeFamily::polygon;
  throw std::invalid_argument("unknown shape family '" + s + "'");
}

Texture parse_texture(const std::string& s) {
  if (s == "flat") return Texture::flat;
  if (s == "gradient") return Texture::gradient;
  if (s == "checker") return Texture::checker;
  throw std::invalid_argument("unknown texture '" + s + "'");
}

void SynthConfig::validate() const {
  if (resolution < 8) throw std::invalid_argument("synth: resolution must be at least 8");
  if (shapes.empty()) throw std::invalid_argument("synth: no shape families");
  if (textures.empty()) throw std::invalid_argument("synth: no textures");
  if (!(attenuation_min > 0.0 && attenuation_min <= attenuation_max && attenuation_max <= 1.0)) {
    throw std::invalid_argument("synth: attenuation range must satisfy 0 < min <= max <= 1");
  }
  if (soft_edge < 0.0) throw std::invalid_argument("synth: soft_edge must be non-negative");
  if (noise < 0.0) throw std::invalid_argument("synth: noise must be non-negative");
  if (perturb && (perturb_gain < 0.0 || perturb_gain >= 0.5 || perturb_mix < 0.0 ||
                  perturb_mix >= 0.2 || perturb_bias < 0.0)) {
    // Keeps the planted map diagonally dominant, hence well away from singular.
    throw std::invalid_argument("synth: perturbation needs gain in [0, 0.5) and mix in [0, 0.2)");
  }
}

std::string scene_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%05zu", index);
  return buf;
}

namespace {

using Color = std::array<double, 3>;

Color random_color(Rng& rng) {
  // Mid-range colors leave headroom for the perturbation.
  return {rng.uniform(45.0, 215.0), rng.uniform(45.0, 215.0), rng.uniform(45.0, 215.0)};
}

ImageF make_background(Texture t, std::size_t n, Rng& rng) {
  ImageF img(n, n, 3);
  const Color c0 = random_color(rng);
  const Color c1 = random_color(rng);
  const double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  const std::size_t cell = 4 + rng.below(n / 4 > 4 ? n / 4 - 3 : 1);
  const std::size_t ox = rng.below(cell), oy = rng.below(cell);
  const double dx = std::cos(angle), dy = std::sin(angle);
  const double half = static_cast<double>(n - 1) / 2.0;
  const double reach = half * (std::abs(dx) + std::abs(dy));
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      double mix = 0.0;
      if (t == Texture::gradient) {
        const double proj = (static_cast<double>(x) - half) * dx + (static_cast<double>(y) - half) * dy;
        mix = reach > 0 ? 0.5 + 0.5 * proj / reach : 0.0;
      } else if (t == Texture::checker) {
        mix = (((x + ox) / cell + (y + oy) / cell) % 2) ? 1.0 : 0.0;
      }
      for (std::size_t c = 0; c < 3; ++c) img.at(x, y, c) = (1.0 - mix) * c0[c] + mix * c1[c];
    }
  }
  return img;
}

struct Point {
  double x, y;
};

double segment_distance(Point p, Point a, Point b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = a.x + t * vx - p.x, ey = a.y + t * vy - p.y;
  return std::sqrt(ex * ex + ey * ey);
}

bool inside_polygon(Point p, const std::vector<Point>& poly) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xcross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xcross) in = !in;
    }
  }
  return in;
}

// Signed distance (positive inside, in pixels) to the shadow outline.
class ShadowShape {
 public:
  ShadowShape(ShapeFamily family, std::size_t n, Rng& rng) : family_(family) {
    const double size = static_cast<double>(n);
    cx_ = rng.uniform(0.25, 0.75) * size;
    cy_ = rng.uniform(0.25, 0.75) * size;
    rx_ = rng.uniform(0.12, 0.3) * size;
    ry_ = rng.uniform(0.12, 0.3) * size;
    if (family == ShapeFamily::polygon) {
      const std::size_t vertices = 5 + rng.below(3);
      const double start = rng.uniform(0.0, 6.283185307179586);
      for (std::size_t k = 0; k < vertices; ++k) {
        const double theta = start + 6.283185307179586 * (static_cast<double>(k) + rng.uniform(-0.3, 0.3)) /
                                         static_cast<double>(vertices);
        const double r = rng.uniform(0.6, 1.0);
        poly_.push_back({cx_ + r * rx_ * std::cos(theta), cy_ + r * ry_ * std::sin(theta)});
      }
    }
  }

  double signed_distance(double x, double y) const {
    const double dx = x - cx_, dy = y - cy_;
    switch (family_) {
      case ShapeFamily::rectangle:
        return std::min(rx_ - std::abs(dx), ry_ - std::abs(dy));
      case ShapeFamily::ellipse: {
        const double q = std::sqrt((dx / rx_) * (dx / rx_) + (dy / ry_) * (dy / ry_));
        return (1.0 - q) * std::min(rx_, ry_);
      }
      case ShapeFamily::polygon: {
        double d = 1e300;
        for (std::size_t i = 0, j = poly_.size() - 1; i < poly_.size(); j = i++) {
          d = std::min(d, segment_distance({x, y}, poly_[j], poly_[i]));
        }
        return inside_polygon({x, y}, poly_) ? d : -d;
      }
    }
    return 0.0;
  }

 private:
  ShapeFamily family_;
  double cx_, cy_, rx_, ry_;
  std::vector<Point> poly_;
};

std::array<double, 12> random_perturbation(const SynthConfig& cfg, Rng& rng) {
  std::array<double, 12> m{};
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      m[r * 4 + c] = r == c ? 1.0 + rng.uniform(-cfg.perturb_gain, cfg.perturb_gain)
                            : rng.uniform(-cfg.perturb_mix, cfg.perturb_mix);
    }
    m[r * 4 + 3] = rng.uniform(-cfg.perturb_bias, cfg.perturb_bias);
  }
  return m;
}

}  // namespace

GeneratedScene generate_scene(const SynthConfig& cfg, std::size_t index) {
  cfg.validate();
  GeneratedScene out;
  SceneInfo& info = out.info;
  info.index = index;
  info.seed = derive_seed(cfg.seed, index);
  Rng rng(info.seed);
  info.shape = cfg.shapes[rng.below(cfg.shapes.size())];
  info.texture = cfg.textures[rng.below(cfg.textures.size())];
  info.attenuation = rng.uniform(cfg.attenuation_min, cfg.attenuation_max);

  const std::size_t n = cfg.resolution;
  ImageF clean = make_background(info.texture, n, rng);
  if (cfg.noise > 0.0) {
    for (double& v : clean.values) v = std::clamp(v + rng.normal(0.0, cfg.noise), 0.0, 255.0);
  }
  const ShadowShape shape(info.shape, n, rng);

  Image8 mask(n, n, 1);
  ImageF shadowed(n, n, 3);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const double d = shape.signed_distance(static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5);
      const double alpha =
          cfg.soft_edge > 0.0 ? std::clamp(0.5 + d / cfg.soft_edge, 0.0, 1.0) : (d >= 0.0 ? 1.0 : 0.0);
      mask.at(x, y) = alpha >= 0.5 ? 1 : 0;
      const double factor = 1.0 - alpha * (1.0 - info.attenuation);
      for (std::size_t c = 0; c < 3; ++c) {
        if (factor == 1.0) {
          shadowed.at(x, y, c) = clean.at(x, y, c);
          continue;
        }
        const double lin = color::srgb_to_linear(clean.at(x, y, c) / 255.0) * factor;
        shadowed.at(x, y, c) = 255.0 * color::linear_to_srgb(lin);
      }
    }
  }

  ImageF free = clean;
  if (cfg.perturb) {
    info.perturbation = random_perturbation(cfg, rng);
    const auto& m = *info.perturbation;
    for (std::size_t i = 0; i < free.pixel_count(); ++i) {
      const double r = clean.values[3 * i], g = clean.values[3 * i + 1], b = clean.values[3 * i + 2];
      for (std::size_t c = 0; c < 3; ++c) {
        free.values[3 * i + c] =
            std::clamp(m[c * 4] * r + m[c * 4 + 1] * g + m[c * 4 + 2] * b + m[c * 4 + 3], 0.0, 255.0);
      }
    }
  }

  out.scene.id = scene_id(index);
  out.scene.shadow_image = quantize(shadowed);
  out.scene.mask = std::move(mask);
  out.scene.shadow_free = quantize(free);
  return out;
}

}  // namespace dscnet
