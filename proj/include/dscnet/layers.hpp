#pragma once

#include <string>
#include <vector>

#include "dscnet/checkpoint.hpp"
#include "dscnet/graph.hpp"
#include "dscnet/random.hpp"
#include "dscnet/tensor.hpp"

namespace dscnet {

/// Convolution weights plus "same" padding for odd kernels.
struct ConvLayer {
  Tensor weight;  // [Cout, Cin, k, k]
  Tensor bias;    // [Cout]

  static ConvLayer gaussian(std::size_t cout, std::size_t cin, std::size_t k, Rng& rng,
                            double stddev, double bias_fill = 0.0);
  static ConvLayer zeros(std::size_t cout, std::size_t cin, std::size_t k);

  std::size_t out_channels() const { return weight.dim(0); }
  std::size_t in_channels() const { return weight.dim(1); }
  std::size_t kernel_size() const { return weight.dim(2); }

  Tensor operator()(Graph& g, const Tensor& x) const;

  void append_named(NamedTensors& out, const std::string& prefix) const;
  void append_params(std::vector<Tensor>& out) const;
};

/// Identity-initialised, gradient-tracked square matrix.
Tensor identity_matrix(std::size_t n);

}  // namespace dscnet
