#include "dscnet/losses.hpp"

#include <algorithm>
#include <cmath>

#include "dscnet/ops.hpp"

namespace dscnet {

namespace {

struct ClassWeights {
  double shadow;
  double non_shadow;
};

void require_mask_pair(const Tensor& p, const Tensor& y, const char* what) {
  require_rank4(p, what);
  if (p.shape() != y.shape() || p.dim(1) != 1) {
    throw ShapeError(std::string(what) + ": prediction " + shape_string(p.shape()) +
                     " and mask " + shape_string(y.shape()) + " must match with one channel");
  }
}

// Weighted binary cross entropy, averaged over every pixel of the batch.
Tensor weighted_ce(Graph& g, const Tensor& p, const Tensor& y,
                   const std::vector<ClassWeights>& weights) {
  const std::size_t batch = p.dim(0), plane = p.dim(2) * p.dim(3);
  const double n = static_cast<double>(p.size());
  auto pv = p.data();
  auto yv = y.data();
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = b * plane; i < (b + 1) * plane; ++i) {
      const double q = std::clamp(pv[i], kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
      loss -= weights[b].shadow * yv[i] * std::log(q) +
              weights[b].non_shadow * (1.0 - yv[i]) * std::log(1.0 - q);
    }
  }
  Tensor out = Tensor::scalar(loss / n);
  if (g.wants({&p})) {
    g.record({p, y}, out, [p = p, y, out, weights, batch, plane, n]() mutable {
      const double go = std::as_const(out).grad()[0];
      auto pv = std::as_const(p).data();
      auto yv = std::as_const(y).data();
      auto gp = p.grad();
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t i = b * plane; i < (b + 1) * plane; ++i) {
          if (pv[i] < kProbabilityEpsilon || pv[i] > 1.0 - kProbabilityEpsilon) continue;
          const double d = -weights[b].shadow * yv[i] / pv[i] +
                           weights[b].non_shadow * (1.0 - yv[i]) / (1.0 - pv[i]);
          gp[i] += go * d / n;
        }
      }
    });
  }
  return out;
}

LossBreakdown aggregate(Graph& g, const Prediction& prediction, const HeadWeights& weights,
                        auto&& head_loss) {
  LossBreakdown out;
  Tensor total;
  auto accumulate = [&](const Tensor& loss, double w) {
    Tensor term = w == 1.0 ? loss : ops::scale(g, loss, w);
    total = total.defined() ? ops::add(g, total, term) : term;
  };
  for (std::size_t i = 0; i < prediction.per_scale.size(); ++i) {
    Tensor l = head_loss(prediction.per_scale[i]);
    out.per_scale.push_back(l.item());
    accumulate(l, weights.scale_weight(i));
  }
  Tensor lm = head_loss(prediction.mlif);
  out.mlif = lm.item();
  accumulate(lm, weights.mlif);
  Tensor lf = head_loss(prediction.fusion);
  out.fusion = lf.item();
  accumulate(lf, weights.fusion);
  out.total = total;
  return out;
}

}  // namespace

Tensor weighted_ce_class(Graph& g, const Tensor& p, const Tensor& y) {
  require_mask_pair(p, y, "weighted_ce_class");
  const std::size_t batch = p.dim(0), plane = p.dim(2) * p.dim(3);
  std::vector<ClassWeights> weights(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    double n_pos = 0.0;
    for (std::size_t i = b * plane; i < (b + 1) * plane; ++i) n_pos += y.data()[i];
    const double total = static_cast<double>(plane);
    weights[b] = {(total - n_pos) / total, n_pos / total};
  }
  return weighted_ce(g, p, y, weights);
}

Tensor weighted_ce_accuracy(Graph& g, const Tensor& p, const Tensor& y) {
  require_mask_pair(p, y, "weighted_ce_accuracy");
  const std::size_t batch = p.dim(0), plane = p.dim(2) * p.dim(3);
  std::vector<ClassWeights> weights(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    double tp = 0, tn = 0, n_pos = 0, n_neg = 0;
    for (std::size_t i = b * plane; i < (b + 1) * plane; ++i) {
      const bool shadow = y.data()[i] >= 0.5;
      const bool predicted = p.data()[i] >= 0.5;
      if (shadow) {
        ++n_pos;
        if (predicted) ++tp;
      } else {
        ++n_neg;
        if (!predicted) ++tn;
      }
    }
    const double pos_ratio = n_pos > 0 ? tp / n_pos : 1.0;
    const double neg_ratio = n_neg > 0 ? tn / n_neg : 1.0;
    weights[b] = {1.0 - pos_ratio, 1.0 - neg_ratio};
  }
  return weighted_ce(g, p, y, weights);
}

Tensor mean_squared_error(Graph& g, const Tensor& prediction, const Tensor& target) {
  if (prediction.shape() != target.shape()) {
    throw ShapeError("mean_squared_error: " + shape_string(prediction.shape()) + " vs " +
                     shape_string(target.shape()));
  }
  auto pv = prediction.data();
  auto tv = target.data();
  const double n = static_cast<double>(pv.size());
  double s = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) s += (pv[i] - tv[i]) * (pv[i] - tv[i]);
  Tensor out = Tensor::scalar(s / n);
  if (g.wants({&prediction, &target})) {
    g.record({prediction, target}, out, [prediction = prediction, target = target, out, n]() mutable {
      const double go = std::as_const(out).grad()[0];
      auto pv = std::as_const(prediction).data();
      auto tv = std::as_const(target).data();
      if (prediction.requires_grad()) {
        auto gp = prediction.grad();
        for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += go * 2.0 * (pv[i] - tv[i]) / n;
      }
      if (target.requires_grad()) {
        auto gt = target.grad();
        for (std::size_t i = 0; i < gt.size(); ++i) gt[i] -= go * 2.0 * (pv[i] - tv[i]) / n;
      }
    });
  }
  return out;
}

LossBreakdown detection_loss(Graph& g, const Prediction& prediction, const Tensor& mask,
                             const HeadWeights& weights) {
  return aggregate(g, prediction, weights, [&](const Tensor& p) {
    return ops::add(g, weighted_ce_class(g, p, mask), weighted_ce_accuracy(g, p, mask));
  });
}

LossBreakdown removal_loss(Graph& g, const Prediction& prediction, const Tensor& target,
                           const HeadWeights& weights) {
  return aggregate(g, prediction, weights,
                   [&](const Tensor& out) { return mean_squared_error(g, out, target); });
}

}  // namespace dscnet
