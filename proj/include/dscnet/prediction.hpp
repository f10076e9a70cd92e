#pragma once

#include <vector>

#include "dscnet/tensor.hpp"

namespace dscnet {

/// Every supervised output of one forward pass, each [1, out, H, W] at the
/// input resolution.
struct Prediction {
  std::vector<Tensor> per_scale;
  Tensor mlif;
  Tensor fusion;
  Tensor final;  // (mlif + fusion) / 2
};

}  // namespace dscnet
