#include "dscnet/layers.hpp"

#include "dscnet/ops.hpp"

namespace dscnet {

ConvLayer ConvLayer::gaussian(std::size_t cout, std::size_t cin, std::size_t k, Rng& rng,
                              double stddev, double bias_fill) {
  ConvLayer layer = zeros(cout, cin, k);
  for (double& v : layer.weight.data()) v = rng.normal(0.0, stddev);
  for (double& v : layer.bias.data()) v = bias_fill;
  return layer;
}

ConvLayer ConvLayer::zeros(std::size_t cout, std::size_t cin, std::size_t k) {
  if (k % 2 == 0) throw ShapeError("conv kernel size must be odd, got " + std::to_string(k));
  ConvLayer layer;
  layer.weight = Tensor(Shape{cout, cin, k, k});
  layer.bias = Tensor(Shape{cout});
  layer.weight.set_requires_grad();
  layer.bias.set_requires_grad();
  return layer;
}

Tensor ConvLayer::operator()(Graph& g, const Tensor& x) const {
  return ops::conv2d(g, x, weight, bias, (kernel_size() - 1) / 2);
}

void ConvLayer::append_named(NamedTensors& out, const std::string& prefix) const {
  out.emplace_back(prefix + ".weight", weight);
  out.emplace_back(prefix + ".bias", bias);
}

void ConvLayer::append_params(std::vector<Tensor>& out) const {
  out.push_back(weight);
  out.push_back(bias);
}

Tensor identity_matrix(std::size_t n) {
  Tensor m(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) m.data()[i * n + i] = 1.0;
  m.set_requires_grad();
  return m;
}

}  // namespace dscnet
