#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dscnet/checkpoint.hpp"
#include "dscnet/dsc_module.hpp"
#include "dscnet/graph.hpp"
#include "dscnet/image.hpp"
#include "dscnet/layers.hpp"
#include "dscnet/prediction.hpp"

namespace dscnet {

enum class Task { detection, removal };

/// Ablation rows: no context modules, context without attention, full DSC.
enum class Variant { basic, basic_context, dsc };

enum class ColorSpace { lab, rgb };

std::string to_string(Task t);
std::string to_string(Variant v);
std::string to_string(ColorSpace c);
Task parse_task(const std::string& s);
Variant parse_variant(const std::string& s);
ColorSpace parse_color_space(const std::string& s);

struct NetworkConfig {
  Task task = Task::detection;
  Variant variant = Variant::dsc;
  std::vector<std::size_t> scale_channels{16, 32, 64, 64};
  std::size_t convs_per_scale = 1;
  bool dsc_on_first_scale = false;
  int rounds = 2;
  bool share_attention = true;
  bool share_recurrence = true;
  std::size_t reduce_factor = 4;
  AttentionInput attention_input = AttentionInput::round_output;
  std::size_t mlif_channels = 32;
  double init_std = 0.1;
  ColorSpace color_space = ColorSpace::lab;
  /// Removal heads predict an offset added to the input converted to the
  /// output color space.
  bool residual = true;

  void validate() const;
  std::size_t scales() const { return scale_channels.size(); }
  std::size_t out_channels() const { return task == Task::detection ? 1 : 3; }
  bool has_dsc(std::size_t scale) const;
  DscConfig dsc_config(std::size_t scale) const;
  /// Channels of the per-scale concatenation (conv features plus DSC features).
  std::size_t scale_feature_channels(std::size_t scale) const;
};

struct NetworkState {
  NetworkConfig config;
  std::vector<std::vector<ConvLayer>> encoder;  // per scale, 3x3 conv + ReLU each
  std::vector<std::optional<DscModuleState>> dsc;
  std::vector<ConvLayer> heads;  // per scale, 1x1 -> out_channels
  // 1x1 conv over the concatenation of all upsampled scale features, stored
  // as one input-channel slice per scale; the bias lives on slice 0.
  std::vector<ConvLayer> mlif_proj;
  ConvLayer mlif_head;
  ConvLayer fusion;  // 1x1 over (scales + 1) * out_channels stacked head outputs

  static NetworkState create(const NetworkConfig& config, std::uint64_t seed);

  NamedTensors named_tensors() const;
  std::vector<Tensor> trainable_parameters() const;
};

/// Maps 0..255 RGB into the network input range.
inline constexpr double kInputScale = 1.0 / 255.0;
inline constexpr double kInputOffset = -0.5;

/// image is [1, 3, H, W] RGB in [0, 255]; H and W divisible by 2^(scales-1).
Prediction forward(Graph& g, const NetworkState& state, const Tensor& image);

/// Input converted into the removal output space (LAB or RGB), [1, 3, H, W].
Tensor color_space_tensor(const ImageF& rgb, ColorSpace space);

struct MaskPrediction {
  ImageF soft;  // 1-channel probabilities
  Image8 mask;  // 1 where soft >= 0.5
};

struct ShadowFreePrediction {
  ImageF lab;
  Image8 rgb;
};

Image8 binarize(const ImageF& soft, double threshold = 0.5);

MaskPrediction predict_mask(const NetworkState& state, const ImageF& rgb);
ShadowFreePrediction predict_shadow_free(const NetworkState& state, const ImageF& rgb);

}  // namespace dscnet
