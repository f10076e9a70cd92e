#pragma once

#include <cstddef>
#include <vector>

#include "dscnet/graph.hpp"
#include "dscnet/tensor.hpp"

// Differentiable operators. Each op computes its result eagerly and, when the
// graph is recording and some input requires grad, appends a backward rule.
namespace dscnet::ops {

/// Cross-correlation of input [B,Cin,H,W] with kernel [Cout,Cin,kh,kw] plus
/// bias [Cout]. Output is [B,Cout,H+2p-kh+1,W+2p-kw+1]. bias may be undefined.
Tensor conv2d(Graph& g, const Tensor& input, const Tensor& kernel, const Tensor& bias,
              std::size_t padding);

Tensor relu(Graph& g, const Tensor& x);
Tensor sigmoid(Graph& g, const Tensor& x);

Tensor add(Graph& g, const Tensor& a, const Tensor& b);
Tensor mul(Graph& g, const Tensor& a, const Tensor& b);
Tensor scale(Graph& g, const Tensor& x, double factor);

/// features [B,C,H,W] scaled per pixel by gate [B,1,H,W].
Tensor mul_gate(Graph& g, const Tensor& features, const Tensor& gate);

Tensor concat_channels(Graph& g, const std::vector<Tensor>& inputs);
Tensor slice_channels(Graph& g, const Tensor& x, std::size_t begin, std::size_t count);

/// Corner-aligned bilinear upsampling to (height, width).
Tensor upsample_bilinear(Graph& g, const Tensor& x, std::size_t height, std::size_t width);

/// 2x2 max pooling with stride 2; odd trailing rows/cols are dropped.
Tensor max_pool2x2(Graph& g, const Tensor& x);

/// Sum of all elements, as a one-element tensor.
Tensor sum(Graph& g, const Tensor& x);

}  // namespace dscnet::ops
