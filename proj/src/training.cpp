#include "dscnet/training.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dscnet/optim.hpp"
#include "dscnet/random.hpp"

namespace dscnet {

void TrainOptions::validate() const {
  if (iterations == 0) throw std::invalid_argument("train: iterations must be positive");
  if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be positive");
  if (accumulate == 0) throw std::invalid_argument("train: accumulate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("train: momentum must be in [0, 1)");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw std::invalid_argument("train: Adam betas must be in [0, 1)");
  }
  if (weight_decay < 0.0) throw std::invalid_argument("train: weight_decay must be non-negative");
  if (!(gamma > 0.0)) throw std::invalid_argument("train: gamma must be positive");
  if (!std::is_sorted(milestones.begin(), milestones.end())) {
    throw std::invalid_argument("train: milestones must be sorted");
  }
}

double TrainOptions::lr_at(std::size_t iteration) const {
  double rate = lr;
  for (std::size_t m : milestones) {
    if (iteration >= m) rate *= gamma;
  }
  return rate;
}

std::string loss_trace_csv(const LossTrace& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "iteration,total_loss";
  const std::size_t scales = trace.empty() ? 0 : trace.front().per_scale.size();
  for (std::size_t s = 0; s < scales; ++s) out << ",scale_" << s;
  out << ",mlif,fusion,lr\n";
  for (const LossRecord& r : trace) {
    out << r.iteration << ',' << r.total;
    for (double v : r.per_scale) out << ',' << v;
    out << ',' << r.mlif << ',' << r.fusion << ',' << r.lr << '\n';
  }
  return out.str();
}

namespace {

// Visits scene indices epoch by epoch, reshuffled with the run seed.
class SampleOrder {
 public:
  SampleOrder(std::size_t n, std::uint64_t seed) : order_(n), rng_(seed) { reshuffle(); }

  std::size_t next() {
    if (pos_ == order_.size()) reshuffle();
    return order_[pos_++];
  }

 private:
  void reshuffle() {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    for (std::size_t i = order_.size(); i > 1; --i) {
      std::swap(order_[i - 1], order_[rng_.below(i)]);
    }
    pos_ = 0;
  }

  std::vector<std::size_t> order_;
  Rng rng_;
  std::size_t pos_ = 0;
};

template <typename Optimizer, typename LossFn>
LossTrace run_training(std::size_t sample_count, Optimizer& optimizer,
                       const TrainOptions& options, std::uint64_t seed, LossFn&& loss_for,
                       const ProgressFn& progress) {
  SampleOrder order(sample_count, derive_seed(seed, 0x5A3D));
  optimizer.zero_grad();
  LossTrace trace;
  trace.reserve(options.iterations);
  const std::vector<Tensor>& params = optimizer.params();
  std::size_t pending = 0;
  for (std::size_t it = 0; it < options.iterations; ++it) {
    const std::size_t idx = order.next();
    Graph g;
    LossBreakdown lb = loss_for(g, idx);
    g.backward(lb.total);
    ++pending;

    LossRecord rec;
    rec.iteration = it;
    rec.lr = options.lr_at(it);
    rec.total = lb.total.item();
    rec.per_scale = lb.per_scale;
    rec.mlif = lb.mlif;
    rec.fusion = lb.fusion;

    if (pending == options.accumulate || it + 1 == options.iterations) {
      if (pending > 1) {
        const double inv = 1.0 / static_cast<double>(pending);
        for (const Tensor& p : params) {
          for (double& v : p.grad()) v *= inv;
        }
      }
      optimizer.step(rec.lr);
      optimizer.zero_grad();
      pending = 0;
    }
    if (progress) progress(rec);
    trace.push_back(std::move(rec));
  }
  return trace;
}

void require_scenes(const std::vector<LabeledScene>& scenes, const char* what) {
  if (scenes.empty()) throw std::invalid_argument(std::string(what) + ": dataset is empty");
  for (const LabeledScene& s : scenes) s.validate();
}

}  // namespace

LossTrace train_detection(const std::vector<LabeledScene>& scenes, NetworkState& state,
                          const TrainOptions& options, std::uint64_t seed,
                          const ProgressFn& progress) {
  require_scenes(scenes, "train_detection");
  options.validate();
  if (state.config.task != Task::detection) {
    throw std::invalid_argument("train_detection needs a detection network");
  }
  std::vector<Tensor> inputs, masks;
  for (const LabeledScene& s : scenes) {
    inputs.push_back(to_tensor(s.shadow_image));
    masks.push_back(to_tensor(s.mask));
  }
  SgdMomentum optimizer(unique_params(state.trainable_parameters()), options.momentum,
                        options.weight_decay);
  return run_training(scenes.size(), optimizer, options, seed,
                      [&](Graph& g, std::size_t i) {
                        const Prediction p = forward(g, state, inputs[i]);
                        return detection_loss(g, p, masks[i], options.head_weights);
                      },
                      progress);
}

TransferMatrix fit_scene_transfer(const LabeledScene& scene) {
  if (!scene.shadow_free) {
    throw std::invalid_argument("scene '" + scene.id + "' has no shadow-free image");
  }
  try {
    return fit_transfer(to_float(scene.shadow_image), to_float(*scene.shadow_free),
                        invert_mask(scene.mask));
  } catch (const DegenerateRegionError& e) {
    throw DegenerateRegionError("scene '" + scene.id + "': " + e.what() +
                                " (synthetic scenes get such colors from noise > 0)");
  }
}

ImageF removal_target_rgb(const LabeledScene& scene, const TransferMatrix* transfer) {
  if (!scene.shadow_free) {
    throw std::invalid_argument("scene '" + scene.id + "' has no shadow-free image");
  }
  ImageF free = to_float(*scene.shadow_free);
  return transfer ? apply_transfer(free, *transfer) : free;
}

LossTrace train_removal(const std::vector<LabeledScene>& scenes, NetworkState& state,
                        const TrainOptions& options, std::uint64_t seed, bool use_color_transfer,
                        std::vector<TransferMatrix>* transfers, const ProgressFn& progress) {
  require_scenes(scenes, "train_removal");
  options.validate();
  if (state.config.task != Task::removal) {
    throw std::invalid_argument("train_removal needs a removal network");
  }
  std::vector<Tensor> inputs, targets;
  if (transfers) transfers->clear();
  // All transfers are fitted before any training step.
  std::vector<TransferMatrix> fitted;
  if (use_color_transfer) {
    for (const LabeledScene& s : scenes) fitted.push_back(fit_scene_transfer(s));
  }
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const LabeledScene& s = scenes[i];
    inputs.push_back(to_tensor(s.shadow_image));
    const ImageF target = removal_target_rgb(s, use_color_transfer ? &fitted[i] : nullptr);
    targets.push_back(color_space_tensor(target, state.config.color_space));
  }
  if (transfers) *transfers = fitted;
  Adam optimizer(unique_params(state.trainable_parameters()), options.beta1, options.beta2,
                 options.weight_decay);
  return run_training(scenes.size(), optimizer, options, seed,
                      [&](Graph& g, std::size_t i) {
                        const Prediction p = forward(g, state, inputs[i]);
                        return removal_loss(g, p, targets[i], options.head_weights);
                      },
                      progress);
}

}  // namespace dscnet
