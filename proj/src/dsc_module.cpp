#include "dscnet/dsc_module.hpp"

#include <cstddef>
#include <stdexcept>

#include "dscnet/ops.hpp"

namespace dscnet {

std::string_view direction_name(Direction d) {
  switch (d) {
    case Direction::left: return "left";
    case Direction::down: return "down";
    case Direction::right: return "right";
    case Direction::up: return "up";
  }
  return "?";
}

void DscConfig::validate() const {
  if (channels_in == 0) throw std::invalid_argument("dsc: channels_in must be positive");
  if (rounds < 1 || rounds > 3) {
    throw std::invalid_argument("dsc: rounds must be 1, 2 or 3, got " + std::to_string(rounds));
  }
  if (reduce_factor == 0 || (4 * channels_in) % reduce_factor != 0) {
    throw std::invalid_argument("dsc: 4*channels_in=" + std::to_string(4 * channels_in) +
                                " is not divisible by reduce_factor=" +
                                std::to_string(reduce_factor));
  }
}

DirectionalWeights DirectionalWeights::identity(std::size_t channels) {
  DirectionalWeights w;
  for (Tensor& a : w.alpha) a = identity_matrix(channels);
  return w;
}

AttentionEstimator AttentionEstimator::create(std::size_t channels, Rng& rng, double stddev) {
  return AttentionEstimator{ConvLayer::gaussian(channels, channels, 3, rng, stddev),
                            ConvLayer::gaussian(channels, channels, 3, rng, stddev),
                            ConvLayer::gaussian(4, channels, 1, rng, stddev, 1.0)};
}

DscModuleState DscModuleState::create(const DscConfig& config, Rng& rng, double stddev) {
  config.validate();
  const std::size_t c = config.channels_in;
  const std::size_t hidden = config.hidden_channels();
  DscModuleState s;
  s.config = config;
  s.input_proj = ConvLayer::gaussian(hidden, c, 1, rng, stddev);
  const int recurrent_sets = config.share_recurrence ? 1 : config.rounds;
  for (int r = 0; r < recurrent_sets; ++r) s.recurrence.push_back(DirectionalWeights::identity(hidden));
  const int estimators = (config.share_attention || config.rounds == 1) ? 1 : config.rounds;
  for (int r = 0; r < estimators; ++r) {
    const bool sees_module_input = r == 0 || config.attention_input == AttentionInput::module_input;
    s.attention.push_back(AttentionEstimator::create(sees_module_input ? c : hidden, rng, stddev));
  }
  for (int r = 0; r + 1 < config.rounds; ++r) {
    s.round_proj.push_back(ConvLayer::gaussian(hidden, 4 * hidden, 1, rng, stddev));
  }
  s.output_proj = ConvLayer::gaussian(config.output_channels(), 4 * hidden, 1, rng, stddev);
  return s;
}

const DirectionalWeights& DscModuleState::recurrence_for(int round) const {
  return recurrence.size() == 1 ? recurrence.front() : recurrence.at(static_cast<std::size_t>(round));
}

const AttentionEstimator& DscModuleState::attention_for(int round) const {
  return attention.size() == 1 ? attention.front() : attention.at(static_cast<std::size_t>(round));
}

void DscModuleState::append_named(NamedTensors& out, const std::string& prefix) const {
  input_proj.append_named(out, prefix + ".input_proj");
  for (std::size_t r = 0; r < recurrence.size(); ++r) {
    for (Direction d : kDirections) {
      out.emplace_back(prefix + ".alpha." + std::to_string(r) + "." + std::string(direction_name(d)),
                       recurrence[r][d]);
    }
  }
  for (std::size_t r = 0; r < attention.size(); ++r) {
    const std::string p = prefix + ".attention." + std::to_string(r);
    attention[r].conv1.append_named(out, p + ".conv1");
    attention[r].conv2.append_named(out, p + ".conv2");
    attention[r].conv3.append_named(out, p + ".conv3");
  }
  for (std::size_t r = 0; r < round_proj.size(); ++r) {
    round_proj[r].append_named(out, prefix + ".round_proj." + std::to_string(r));
  }
  output_proj.append_named(out, prefix + ".output_proj");
}

void DscModuleState::append_params(std::vector<Tensor>& out) const {
  input_proj.append_params(out);
  for (const DirectionalWeights& w : recurrence) {
    for (const Tensor& a : w.alpha) out.push_back(a);
  }
  if (config.attention == AttentionMode::learned) {
    for (const AttentionEstimator& e : attention) {
      e.conv1.append_params(out);
      e.conv2.append_params(out);
      e.conv3.append_params(out);
    }
  }
  for (const ConvLayer& p : round_proj) p.append_params(out);
  output_proj.append_params(out);
}

namespace {

// Geometry of one scan: `lines` independent sequences of `length` pixels;
// pixel k of line l sits at start(l) + k * stride within an H*W plane.
struct ScanGeometry {
  std::size_t lines;
  std::size_t length;
  std::ptrdiff_t line_step;  // start(l) = first + l * line_step
  std::ptrdiff_t first;
  std::ptrdiff_t stride;
};

ScanGeometry scan_geometry(Direction d, std::size_t h, std::size_t w) {
  const auto H = static_cast<std::ptrdiff_t>(h), W = static_cast<std::ptrdiff_t>(w);
  switch (d) {
    case Direction::right: return {h, w, W, 0, 1};
    case Direction::left: return {h, w, W, W - 1, -1};
    case Direction::down: return {w, h, 1, 0, W};
    case Direction::up: return {w, h, 1, (H - 1) * W, -W};
  }
  throw std::logic_error("bad direction");
}

}  // namespace

Tensor translate_direction(Graph& g, const Tensor& features, const Tensor& alpha,
                           Direction direction) {
  require_rank4(features, "translate_direction");
  const std::size_t batch = features.dim(0), c = features.dim(1);
  const std::size_t h = features.dim(2), w = features.dim(3), plane = h * w;
  if (alpha.shape() != Shape{c, c}) {
    throw ShapeError("translate_direction: alpha must be " + shape_string(Shape{c, c}) + ", got " +
                     shape_string(alpha.shape()));
  }
  const ScanGeometry geo = scan_geometry(direction, h, w);
  Tensor out(features.shape());
  auto x = features.data();
  auto a = alpha.data();
  auto o = out.data();
  std::vector<double> prev(c);

  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t base = b * c * plane;
    for (std::size_t l = 0; l < geo.lines; ++l) {
      std::fill(prev.begin(), prev.end(), 0.0);
      std::ptrdiff_t pix = geo.first + static_cast<std::ptrdiff_t>(l) * geo.line_step;
      for (std::size_t k = 0; k < geo.length; ++k, pix += geo.stride) {
        for (std::size_t oc = 0; oc < c; ++oc) {
          double pre = x[base + oc * plane + static_cast<std::size_t>(pix)];
          const double* arow = a.data() + oc * c;
          for (std::size_t ic = 0; ic < c; ++ic) pre += arow[ic] * prev[ic];
          o[base + oc * plane + static_cast<std::size_t>(pix)] = pre > 0.0 ? pre : 0.0;
        }
        for (std::size_t oc = 0; oc < c; ++oc) prev[oc] = o[base + oc * plane + static_cast<std::size_t>(pix)];
      }
    }
  }

  if (g.wants({&features, &alpha})) {
    g.record({features, alpha}, out, [features = features, alpha = alpha, out, geo, batch, c, plane]() mutable {
      auto go = std::as_const(out).grad();
      auto o = std::as_const(out).data();
      auto a = std::as_const(alpha).data();
      const bool want_x = features.requires_grad(), want_a = alpha.requires_grad();
      std::vector<double> carry(c), gpre(c);
      for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t base = b * c * plane;
        for (std::size_t l = 0; l < geo.lines; ++l) {
          std::fill(carry.begin(), carry.end(), 0.0);
          const std::ptrdiff_t start = geo.first + static_cast<std::ptrdiff_t>(l) * geo.line_step;
          for (std::size_t k = geo.length; k-- > 0;) {
            const auto pix = static_cast<std::size_t>(start + static_cast<std::ptrdiff_t>(k) * geo.stride);
            for (std::size_t oc = 0; oc < c; ++oc) {
              const std::size_t idx = base + oc * plane + pix;
              gpre[oc] = o[idx] > 0.0 ? go[idx] + carry[oc] : 0.0;
            }
            if (want_x) {
              auto gx = features.grad();
              for (std::size_t oc = 0; oc < c; ++oc) gx[base + oc * plane + pix] += gpre[oc];
            }
            if (k == 0) break;
            const auto prev_pix =
                static_cast<std::size_t>(start + static_cast<std::ptrdiff_t>(k - 1) * geo.stride);
            if (want_a) {
              auto ga = alpha.grad();
              for (std::size_t oc = 0; oc < c; ++oc) {
                if (gpre[oc] == 0.0) continue;
                double* garow = ga.data() + oc * c;
                for (std::size_t ic = 0; ic < c; ++ic) garow[ic] += gpre[oc] * o[base + ic * plane + prev_pix];
              }
            }
            std::fill(carry.begin(), carry.end(), 0.0);
            for (std::size_t oc = 0; oc < c; ++oc) {
              if (gpre[oc] == 0.0) continue;
              const double* arow = a.data() + oc * c;
              for (std::size_t ic = 0; ic < c; ++ic) carry[ic] += arow[ic] * gpre[oc];
            }
          }
        }
      }
    });
  }
  return out;
}

AttentionMaps estimate_attention(Graph& g, const Tensor& features,
                                 const AttentionEstimator& estimator) {
  Tensor t = ops::relu(g, estimator.conv1(g, features));
  t = ops::relu(g, estimator.conv2(g, t));
  Tensor weights = estimator.conv3(g, t);
  if (weights.dim(1) != 4) {
    throw ShapeError("attention estimator must output 4 channels, got " +
                     std::to_string(weights.dim(1)));
  }
  AttentionMaps maps;
  for (Direction d : kDirections) {
    const auto i = static_cast<std::size_t>(d);
    maps[i] = ops::slice_channels(g, weights, i, 1);
  }
  return maps;
}

Tensor dsc_forward(Graph& g, const Tensor& features, const DscModuleState& state) {
  require_rank4(features, "dsc_forward");
  const DscConfig& cfg = state.config;
  if (features.dim(1) != cfg.channels_in) {
    throw ShapeError("dsc_forward: features have " + std::to_string(features.dim(1)) +
                     " channels, module expects " + std::to_string(cfg.channels_in));
  }
  const bool learned = cfg.attention == AttentionMode::learned;
  Tensor x = state.input_proj(g, features);

  AttentionMaps shared;
  if (learned && state.attention.size() == 1) shared = estimate_attention(g, features, state.attention_for(0));

  for (int r = 0; r < cfg.rounds; ++r) {
    AttentionMaps maps;
    if (learned) {
      if (state.attention.size() == 1) {
        maps = shared;
      } else {
        const bool module_input = r == 0 || cfg.attention_input == AttentionInput::module_input;
        maps = estimate_attention(g, module_input ? features : x, state.attention_for(r));
      }
    }
    const DirectionalWeights& alpha = state.recurrence_for(r);
    std::vector<Tensor> parts;
    parts.reserve(4);
    for (Direction d : kDirections) {
      Tensor ctx = translate_direction(g, x, alpha[d], d);
      if (learned) ctx = ops::mul_gate(g, ctx, maps[static_cast<std::size_t>(d)]);
      parts.push_back(std::move(ctx));
    }
    Tensor cat = ops::concat_channels(g, parts);
    if (r + 1 < cfg.rounds) {
      x = state.round_proj[static_cast<std::size_t>(r)](g, cat);
    } else {
      return ops::relu(g, state.output_proj(g, cat));
    }
  }
  throw std::logic_error("dsc_forward: no rounds");
}

}  // namespace dscnet
