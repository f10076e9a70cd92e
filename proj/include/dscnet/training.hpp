#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dscnet/color_transfer.hpp"
#include "dscnet/losses.hpp"
#include "dscnet/network.hpp"
#include "dscnet/scene.hpp"

namespace dscnet {

struct TrainOptions {
  std::size_t iterations = 2000;  // one sample forward/backward each
  double lr = 5e-3;
  // SGD (detection)
  double momentum = 0.9;
  double weight_decay = 5e-4;
  // Adam (removal)
  double beta1 = 0.9;
  double beta2 = 0.99;
  /// The learning rate is multiplied by `gamma` at each milestone iteration.
  std::vector<std::size_t> milestones;
  double gamma = 0.316;
  /// Gradients of `accumulate` consecutive iterations are averaged into one step.
  std::size_t accumulate = 1;
  HeadWeights head_weights;

  void validate() const;
  double lr_at(std::size_t iteration) const;
};

struct LossRecord {
  std::size_t iteration = 0;
  double lr = 0.0;
  double total = 0.0;
  std::vector<double> per_scale;
  double mlif = 0.0;
  double fusion = 0.0;
};

using LossTrace = std::vector<LossRecord>;
using ProgressFn = std::function<void(const LossRecord&)>;

/// Columns: iteration, total_loss, scale_<i>..., mlif, fusion, lr.
std::string loss_trace_csv(const LossTrace& trace);

/// SGD with momentum on the deep-supervision detection loss.
LossTrace train_detection(const std::vector<LabeledScene>& scenes, NetworkState& state,
                          const TrainOptions& options, std::uint64_t seed,
                          const ProgressFn& progress = {});

/// Per-scene color transfer fitted over the non-shadow region, mapping the
/// shadow-free image onto the shadow image.
TransferMatrix fit_scene_transfer(const LabeledScene& scene);

/// Removal target in RGB: the shadow-free image, or its color-compensated
/// version when `transfer` is given.
ImageF removal_target_rgb(const LabeledScene& scene, const TransferMatrix* transfer);

/// Adam on the deep-supervision removal loss. With `use_color_transfer` the
/// targets are the compensated shadow-free images; the fitted matrices are
/// stored in `transfers` when it is non-null.
LossTrace train_removal(const std::vector<LabeledScene>& scenes, NetworkState& state,
                        const TrainOptions& options, std::uint64_t seed, bool use_color_transfer,
                        std::vector<TransferMatrix>* transfers = nullptr,
                        const ProgressFn& progress = {});

}  // namespace dscnet
