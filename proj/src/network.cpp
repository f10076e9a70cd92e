#include "dscnet/network.hpp"

#include <algorithm>
#include <stdexcept>

#include "dscnet/color.hpp"
#include "dscnet/ops.hpp"

namespace dscnet {

std::string to_string(Task t) { return t == Task::detection ? "detection" : "removal"; }

std::string to_string(Variant v) {
  switch (v) {
    case Variant::basic: return "basic";
    case Variant::basic_context: return "basic+context";
    case Variant::dsc: return "dsc";
  }
  return "?";
}

std::string to_string(ColorSpace c) { return c == ColorSpace::lab ? "lab" : "rgb"; }

Task parse_task(const std::string& s) {
  if (s == "detection" || s == "detect") return Task::detection;
  if (s == "removal" || s == "remove") return Task::removal;
  throw std::invalid_argument("unknown task '" + s + "' (expected detection or removal)");
}

Variant parse_variant(const std::string& s) {
  if (s == "basic") return Variant::basic;
  if (s == "basic+context" || s == "basic_context") return Variant::basic_context;
  if (s == "dsc") return Variant::dsc;
  throw std::invalid_argument("unknown variant '" + s + "' (expected basic, basic+context or dsc)");
}

ColorSpace parse_color_space(const std::string& s) {
  if (s == "lab") return ColorSpace::lab;
  if (s == "rgb") return ColorSpace::rgb;
  throw std::invalid_argument("unknown color space '" + s + "' (expected lab or rgb)");
}

void NetworkConfig::validate() const {
  if (scale_channels.size() < 2) {
    throw std::invalid_argument("network needs at least 2 scales, got " +
                                std::to_string(scale_channels.size()));
  }
  for (std::size_t c : scale_channels) {
    if (c == 0) throw std::invalid_argument("scale channel widths must be positive");
  }
  if (convs_per_scale == 0) throw std::invalid_argument("convs_per_scale must be positive");
  if (mlif_channels == 0) throw std::invalid_argument("mlif_channels must be positive");
  if (init_std <= 0.0) throw std::invalid_argument("init_std must be positive");
  if (variant != Variant::basic) {
    for (std::size_t s = 0; s < scales(); ++s) {
      if (has_dsc(s)) dsc_config(s).validate();
    }
  }
}

bool NetworkConfig::has_dsc(std::size_t scale) const {
  if (variant == Variant::basic) return false;
  return scale > 0 || dsc_on_first_scale;
}

DscConfig NetworkConfig::dsc_config(std::size_t scale) const {
  DscConfig c;
  c.channels_in = scale_channels.at(scale);
  c.channels_out = c.channels_in;
  c.rounds = rounds;
  c.share_attention = share_attention;
  c.share_recurrence = share_recurrence;
  c.reduce_factor = reduce_factor;
  c.attention = variant == Variant::dsc ? AttentionMode::learned : AttentionMode::ones;
  c.attention_input = attention_input;
  return c;
}

std::size_t NetworkConfig::scale_feature_channels(std::size_t scale) const {
  const std::size_t c = scale_channels.at(scale);
  return has_dsc(scale) ? c + dsc_config(scale).output_channels() : c;
}

NetworkState NetworkState::create(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const double sd = config.init_std;
  const std::size_t out = config.out_channels();
  NetworkState s;
  s.config = config;
  std::size_t in = 3;
  for (std::size_t sc = 0; sc < config.scales(); ++sc) {
    std::vector<ConvLayer> stage;
    for (std::size_t k = 0; k < config.convs_per_scale; ++k) {
      stage.push_back(ConvLayer::gaussian(config.scale_channels[sc], in, 3, rng, sd));
      in = config.scale_channels[sc];
    }
    s.encoder.push_back(std::move(stage));
  }
  for (std::size_t sc = 0; sc < config.scales(); ++sc) {
    if (config.has_dsc(sc)) {
      s.dsc.emplace_back(DscModuleState::create(config.dsc_config(sc), rng, sd));
    } else {
      s.dsc.emplace_back(std::nullopt);
    }
  }
  for (std::size_t sc = 0; sc < config.scales(); ++sc) {
    s.heads.push_back(ConvLayer::gaussian(out, config.scale_feature_channels(sc), 1, rng, sd));
  }
  for (std::size_t sc = 0; sc < config.scales(); ++sc) {
    ConvLayer slice =
        ConvLayer::gaussian(config.mlif_channels, config.scale_feature_channels(sc), 1, rng, sd);
    if (sc > 0) slice.bias = Tensor();
    s.mlif_proj.push_back(std::move(slice));
  }
  s.mlif_head = ConvLayer::gaussian(out, config.mlif_channels, 1, rng, sd);
  s.fusion = ConvLayer::gaussian(out, out * (config.scales() + 1), 1, rng, sd);
  return s;
}

NamedTensors NetworkState::named_tensors() const {
  NamedTensors out;
  for (std::size_t sc = 0; sc < encoder.size(); ++sc) {
    for (std::size_t k = 0; k < encoder[sc].size(); ++k) {
      encoder[sc][k].append_named(out, "enc." + std::to_string(sc) + ".conv" + std::to_string(k));
    }
  }
  for (std::size_t sc = 0; sc < dsc.size(); ++sc) {
    if (dsc[sc]) dsc[sc]->append_named(out, "dsc." + std::to_string(sc));
  }
  for (std::size_t sc = 0; sc < heads.size(); ++sc) {
    heads[sc].append_named(out, "head." + std::to_string(sc));
  }
  for (std::size_t sc = 0; sc < mlif_proj.size(); ++sc) {
    out.emplace_back("mlif.proj." + std::to_string(sc) + ".weight", mlif_proj[sc].weight);
  }
  out.emplace_back("mlif.proj.bias", mlif_proj.front().bias);
  mlif_head.append_named(out, "mlif.head");
  fusion.append_named(out, "fusion");
  return out;
}

std::vector<Tensor> NetworkState::trainable_parameters() const {
  std::vector<Tensor> out;
  for (const auto& stage : encoder) {
    for (const ConvLayer& c : stage) c.append_params(out);
  }
  for (const auto& d : dsc) {
    if (d) d->append_params(out);
  }
  for (const ConvLayer& h : heads) h.append_params(out);
  for (const ConvLayer& m : mlif_proj) {
    out.push_back(m.weight);
    if (m.bias.defined()) out.push_back(m.bias);
  }
  mlif_head.append_params(out);
  fusion.append_params(out);
  return out;
}

Tensor color_space_tensor(const ImageF& rgb, ColorSpace space) {
  return space == ColorSpace::lab ? to_tensor(color::rgb_to_lab(rgb)) : to_tensor(rgb);
}

Prediction forward(Graph& g, const NetworkState& state, const Tensor& image) {
  const NetworkConfig& cfg = state.config;
  require_rank4(image, "network input");
  if (image.dim(1) != 3) {
    throw ShapeError("network input must have 3 channels, got " + std::to_string(image.dim(1)));
  }
  const std::size_t h = image.dim(2), w = image.dim(3);
  const std::size_t factor = std::size_t{1} << (cfg.scales() - 1);
  if (h % factor != 0 || w % factor != 0) {
    throw ShapeError("input " + std::to_string(h) + "x" + std::to_string(w) +
                     " is not divisible by " + std::to_string(factor) + " for " +
                     std::to_string(cfg.scales()) + " scales");
  }

  const bool detection = cfg.task == Task::detection;
  Tensor base;
  if (!detection && cfg.residual) base = color_space_tensor(to_image(image), cfg.color_space);

  // Encoder, context features, heads and MLIF slices per scale.
  Tensor x = ops::scale(g, image, kInputScale);
  x = ops::add(g, x, Tensor(x.shape(), kInputOffset));
  std::vector<Tensor> raw_heads;
  Tensor mlif_sum;
  for (std::size_t sc = 0; sc < cfg.scales(); ++sc) {
    if (sc > 0) x = ops::max_pool2x2(g, x);
    for (const ConvLayer& conv : state.encoder[sc]) x = ops::relu(g, conv(g, x));
    Tensor feats = x;
    if (state.dsc[sc]) feats = ops::concat_channels(g, {x, dsc_forward(g, x, *state.dsc[sc])});
    // 1x1 convolutions commute with bilinear upsampling, so both the heads
    // and the MLIF slices run at the scale's own resolution.
    raw_heads.push_back(ops::upsample_bilinear(g, state.heads[sc](g, feats), h, w));
    const ConvLayer& slice = state.mlif_proj[sc];
    Tensor part = ops::upsample_bilinear(
        g, ops::conv2d(g, feats, slice.weight, slice.bias, 0), h, w);
    mlif_sum = mlif_sum.defined() ? ops::add(g, mlif_sum, part) : part;
  }
  Tensor mlif_features = ops::relu(g, mlif_sum);
  raw_heads.push_back(state.mlif_head(g, mlif_features));

  Prediction p;
  std::vector<Tensor> head_outputs;
  for (const Tensor& raw : raw_heads) {
    if (detection) {
      head_outputs.push_back(ops::sigmoid(g, raw));
    } else {
      head_outputs.push_back(raw);
    }
  }
  Tensor fused = state.fusion(g, ops::concat_channels(g, head_outputs));
  if (detection) {
    fused = ops::sigmoid(g, fused);
  }
  auto finish = [&](const Tensor& t) { return base.defined() ? ops::add(g, t, base) : t; };
  for (std::size_t sc = 0; sc < cfg.scales(); ++sc) p.per_scale.push_back(finish(head_outputs[sc]));
  p.mlif = finish(head_outputs.back());
  p.fusion = finish(fused);
  p.final = ops::scale(g, ops::add(g, p.mlif, p.fusion), 0.5);
  return p;
}

Image8 binarize(const ImageF& soft, double threshold) {
  if (soft.channels != 1) throw ShapeError("binarize: expected a single-channel map");
  Image8 mask(soft.width, soft.height, 1);
  for (std::size_t i = 0; i < soft.values.size(); ++i) mask.values[i] = soft.values[i] >= threshold;
  return mask;
}

MaskPrediction predict_mask(const NetworkState& state, const ImageF& rgb) {
  if (state.config.task != Task::detection) {
    throw std::invalid_argument("predict_mask needs a detection network");
  }
  Graph g(false);
  const Prediction p = forward(g, state, to_tensor(rgb));
  MaskPrediction out;
  out.soft = to_image(p.final);
  out.mask = binarize(out.soft);
  return out;
}

ShadowFreePrediction predict_shadow_free(const NetworkState& state, const ImageF& rgb) {
  if (state.config.task != Task::removal) {
    throw std::invalid_argument("predict_shadow_free needs a removal network");
  }
  Graph g(false);
  const Prediction p = forward(g, state, to_tensor(rgb));
  ShadowFreePrediction out;
  ImageF raw = to_image(p.final);
  if (state.config.color_space == ColorSpace::lab) {
    out.lab = raw;
    out.rgb = quantize(color::lab_to_rgb(raw));
  } else {
    for (double& v : raw.values) v = std::clamp(v, 0.0, 255.0);
    out.lab = color::rgb_to_lab(raw);
    out.rgb = quantize(raw);
  }
  return out;
}

}  // namespace dscnet
