#pragma once

#include <vector>

#include "dscnet/graph.hpp"
#include "dscnet/prediction.hpp"
#include "dscnet/tensor.hpp"

namespace dscnet {

/// Probabilities are clamped to [eps, 1 - eps] before taking logs.
inline constexpr double kProbabilityEpsilon = 1e-7;

/// Cross entropy weighted by the class distribution of each image: shadow
/// pixels by N_n / N, non-shadow pixels by N_p / N. Mean over pixels.
/// p and y are [B, 1, H, W]; y holds 0/1.
Tensor weighted_ce_class(Graph& g, const Tensor& p, const Tensor& y);

/// Cross entropy weighted by per-class error: shadow pixels by 1 - TP/N_p,
/// non-shadow pixels by 1 - TN/N_n, counts taken from p thresholded at 0.5
/// (p >= 0.5 is shadow). An absent class gets ratio 1, hence weight 0.
Tensor weighted_ce_accuracy(Graph& g, const Tensor& p, const Tensor& y);

/// Mean over all elements of (a - b)^2.
Tensor mean_squared_error(Graph& g, const Tensor& prediction, const Tensor& target);

struct HeadWeights {
  std::vector<double> per_scale;  // empty means 1 for every scale
  double mlif = 1.0;
  double fusion = 1.0;

  double scale_weight(std::size_t i) const { return per_scale.empty() ? 1.0 : per_scale.at(i); }
};

struct LossBreakdown {
  Tensor total;
  std::vector<double> per_scale;  // unweighted head losses
  double mlif = 0.0;
  double fusion = 0.0;
};

/// sum_i w_i L_i + w_m L_m + w_f L_f with L = class-weighted CE + accuracy-weighted CE.
LossBreakdown detection_loss(Graph& g, const Prediction& prediction, const Tensor& mask,
                             const HeadWeights& weights = {});

/// Same aggregation with mean squared error against the target image.
LossBreakdown removal_loss(Graph& g, const Prediction& prediction, const Tensor& target,
                           const HeadWeights& weights = {});

}  // namespace dscnet
