#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dscnet/metrics.hpp"
#include "dscnet/network.hpp"
#include "dscnet/scene.hpp"

namespace dscnet {

/// Squared LAB error sums for one region; count is in pixels.
struct ErrorSum {
  double squared = 0.0;
  std::size_t pixels = 0;
  ErrorSum& operator+=(const ErrorSum& o) {
    squared += o.squared;
    pixels += o.pixels;
    return *this;
  }
  /// sqrt(squared / (3 * pixels)); empty when no pixels.
  std::optional<double> rmse() const;
};

struct SampleMetrics {
  std::string id;
  // detection
  std::optional<MaskStats> stats;
  // removal
  ErrorSum all, shadow, nonshadow;

  std::optional<double> accuracy() const;
  std::optional<Ber> ber() const;
};

struct EvalSummary {
  std::size_t samples = 0;
  // detection, from counts pooled over the dataset
  std::optional<double> accuracy;
  std::optional<Ber> ber;
  std::optional<double> mean_image_ber;  // per-image average, for reference
  // removal, pooled over all pixels of the dataset
  std::optional<double> rmse_all, rmse_shadow, rmse_nonshadow;
};

EvalSummary summarize(const std::vector<SampleMetrics>& samples);

/// sample_id,accuracy,ber,rmse_all,rmse_shadow,rmse_nonshadow,tp,tn,n_pos,n_neg
/// Fields that do not apply are left empty.
std::string metrics_csv(const std::vector<SampleMetrics>& samples);

/// Worker count from DSC_THREADS (default 1, capped at 64).
std::size_t eval_threads_from_env();

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

SampleMetrics detection_metrics(const std::string& id, const Image8& predicted, const Image8& truth);

/// LAB errors of an RGB prediction against an RGB target, split by the mask.
SampleMetrics removal_metrics(const std::string& id, const ImageF& predicted_lab,
                              const ImageF& target_lab, const Image8& mask);

enum class RemovalTarget { shadow_free, transferred };

std::vector<SampleMetrics> evaluate_detection(const NetworkState& state,
                                              const std::vector<LabeledScene>& scenes,
                                              std::size_t threads = 1);

/// Ground-truth masks scored against themselves (self-evaluation).
std::vector<SampleMetrics> evaluate_mask_identity(const std::vector<LabeledScene>& scenes);

std::vector<SampleMetrics> evaluate_removal(const NetworkState& state,
                                            const std::vector<LabeledScene>& scenes,
                                            RemovalTarget target, std::size_t threads = 1);

/// The do-nothing remover: the shadow image itself is the prediction.
std::vector<SampleMetrics> evaluate_removal_baseline(const std::vector<LabeledScene>& scenes,
                                                     RemovalTarget target);

}  // namespace dscnet
