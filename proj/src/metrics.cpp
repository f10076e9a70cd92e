#include "dscnet/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace dscnet {

MaskStats& MaskStats::operator+=(const MaskStats& o) {
  tp += o.tp;
  tn += o.tn;
  n_pos += o.n_pos;
  n_neg += o.n_neg;
  return *this;
}

MaskStats mask_stats(const Image8& predicted, const Image8& truth) {
  if (!predicted.same_size(truth) || predicted.channels != 1 || truth.channels != 1) {
    throw ShapeError("mask_stats: masks must be single-channel and equally sized");
  }
  MaskStats s;
  for (std::size_t i = 0; i < truth.values.size(); ++i) {
    const bool t = truth.values[i] != 0;
    const bool p = predicted.values[i] != 0;
    if (t) {
      ++s.n_pos;
      if (p) ++s.tp;
    } else {
      ++s.n_neg;
      if (!p) ++s.tn;
    }
  }
  return s;
}

double accuracy(const MaskStats& s) {
  if (s.total() == 0) throw std::invalid_argument("accuracy: empty image");
  return static_cast<double>(s.tp + s.tn) / static_cast<double>(s.total());
}

Ber ber(const MaskStats& s) {
  if (s.total() == 0) throw std::invalid_argument("ber: empty image");
  if (s.n_pos == 0) {
    return {(1.0 - static_cast<double>(s.tn) / static_cast<double>(s.n_neg)) * 100.0, true};
  }
  if (s.n_neg == 0) {
    return {(1.0 - static_cast<double>(s.tp) / static_cast<double>(s.n_pos)) * 100.0, true};
  }
  const double pos = static_cast<double>(s.tp) / static_cast<double>(s.n_pos);
  const double neg = static_cast<double>(s.tn) / static_cast<double>(s.n_neg);
  return {(1.0 - 0.5 * (pos + neg)) * 100.0, false};
}

double rmse_lab(const ImageF& predicted_lab, const ImageF& truth_lab, const Image8* region) {
  require_same_size(predicted_lab, truth_lab, "rmse_lab");
  if (region && (!region->same_size(truth_lab) || region->channels != 1)) {
    throw ShapeError("rmse_lab: region mask does not match the images");
  }
  const std::size_t c = truth_lab.channels;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < truth_lab.pixel_count(); ++i) {
    if (region && region->values[i] == 0) continue;
    for (std::size_t k = 0; k < c; ++k) {
      const double d = predicted_lab.values[i * c + k] - truth_lab.values[i * c + k];
      sum += d * d;
    }
    ++n;
  }
  if (n == 0) throw std::invalid_argument("rmse_lab: empty region");
  return std::sqrt(sum / static_cast<double>(n * c));
}

}  // namespace dscnet
