#pragma once

#include <cstdint>

#include "dscnet/image.hpp"

namespace dscnet {

/// Confusion counts of a binary mask prediction (1 = shadow).
struct MaskStats {
  std::uint64_t tp = 0;     // shadow pixels predicted shadow
  std::uint64_t tn = 0;     // non-shadow pixels predicted non-shadow
  std::uint64_t n_pos = 0;  // shadow pixels in the truth
  std::uint64_t n_neg = 0;  // non-shadow pixels in the truth

  std::uint64_t total() const { return n_pos + n_neg; }
  MaskStats& operator+=(const MaskStats& o);
  friend bool operator==(const MaskStats&, const MaskStats&) = default;
};

MaskStats mask_stats(const Image8& predicted, const Image8& truth);

/// (TP + TN) / (N_p + N_n). Throws on an empty image.
double accuracy(const MaskStats& s);

/// Balance error rate in percent. When one class is absent its ratio is
/// left out, the value reflects the other class alone, and `partial` is set.
struct Ber {
  double value = 0.0;
  bool partial = false;
};
Ber ber(const MaskStats& s);

/// Root of the mean squared per-channel difference between two LAB images,
/// over the pixels where `region` is non-zero (all pixels when null).
double rmse_lab(const ImageF& predicted_lab, const ImageF& truth_lab, const Image8* region = nullptr);

}  // namespace dscnet
