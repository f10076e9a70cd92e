#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "dscnet/checkpoint.hpp"
#include "dscnet/graph.hpp"
#include "dscnet/layers.hpp"
#include "dscnet/random.hpp"
#include "dscnet/tensor.hpp"

namespace dscnet {

/// Scan directions, in the channel order of the attention estimator output.
enum class Direction { left = 0, down = 1, right = 2, up = 3 };
inline constexpr std::array<Direction, 4> kDirections = {Direction::left, Direction::down,
                                                         Direction::right, Direction::up};
std::string_view direction_name(Direction d);

enum class AttentionMode {
  learned,  // gates come from the attention estimator
  ones,     // every gate fixed at one: plain spatial context
};

/// What the estimator sees in rounds after the first when it is not shared.
enum class AttentionInput { round_output, module_input };

struct DscConfig {
  std::size_t channels_in = 0;
  std::size_t channels_out = 0;  // 0 means channels_in
  int rounds = 2;
  bool share_attention = true;
  bool share_recurrence = true;
  std::size_t reduce_factor = 4;
  AttentionMode attention = AttentionMode::learned;
  AttentionInput attention_input = AttentionInput::round_output;

  /// Throws std::invalid_argument on an unusable configuration.
  void validate() const;
  /// Width of the recurrent state: the 4-direction concat divided by reduce_factor.
  std::size_t hidden_channels() const { return 4 * channels_in / reduce_factor; }
  std::size_t output_channels() const { return channels_out ? channels_out : channels_in; }
};

/// Recurrent hidden-to-hidden matrices, one per direction.
struct DirectionalWeights {
  std::array<Tensor, 4> alpha;  // indexed by Direction, each [C, C]

  static DirectionalWeights identity(std::size_t channels);
  const Tensor& operator[](Direction d) const { return alpha[static_cast<std::size_t>(d)]; }
  Tensor& operator[](Direction d) { return alpha[static_cast<std::size_t>(d)]; }
};

/// conv 3x3 -> ReLU -> conv 3x3 -> ReLU -> conv 1x1 (4 channels).
struct AttentionEstimator {
  ConvLayer conv1;
  ConvLayer conv2;
  ConvLayer conv3;

  static AttentionEstimator create(std::size_t channels, Rng& rng, double stddev);
};

/// One single-channel gate per direction, indexed by Direction.
using AttentionMaps = std::array<Tensor, 4>;

struct DscModuleState {
  DscConfig config;
  ConvLayer input_proj;                        // 1x1, C -> hidden
  std::vector<DirectionalWeights> recurrence;  // 1 shared set or one per round
  std::vector<AttentionEstimator> attention;   // 1 shared estimator or one per round
  std::vector<ConvLayer> round_proj;           // 1x1, 4*hidden -> hidden, rounds - 1 of them
  ConvLayer output_proj;                       // 1x1, 4*hidden -> C_out, followed by ReLU

  /// Gaussian kernels, identity recurrences, zero biases except the last
  /// estimator layer, whose bias starts at one so every gate opens at 1.
  static DscModuleState create(const DscConfig& config, Rng& rng, double stddev);

  const DirectionalWeights& recurrence_for(int round) const;
  const AttentionEstimator& attention_for(int round) const;

  /// Every parameter, shared ones listed once, under "<prefix>.<param>".
  void append_named(NamedTensors& out, const std::string& prefix) const;
  /// Parameters that influence the output under the current config.
  void append_params(std::vector<Tensor>& out) const;
};

/// IRNN scan: h = max(alpha * h_prev + x, 0) along `direction`, with a zero
/// state entering at the border. alpha mixes channels at every pixel.
Tensor translate_direction(Graph& g, const Tensor& features, const Tensor& alpha,
                           Direction direction);

AttentionMaps estimate_attention(Graph& g, const Tensor& features,
                                 const AttentionEstimator& estimator);

/// Full block: project, then per round scan four directions, gate each by
/// its attention map, concatenate and project.
Tensor dsc_forward(Graph& g, const Tensor& features, const DscModuleState& state);

}  // namespace dscnet
