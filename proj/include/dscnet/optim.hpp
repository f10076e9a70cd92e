#pragma once

#include <cstdint>
#include <vector>

#include "dscnet/tensor.hpp"

namespace dscnet {

/// SGD with classical momentum: v <- m*v + g + wd*p ; p <- p - lr*v.
class SgdMomentum {
 public:
  SgdMomentum(std::vector<Tensor> params, double momentum, double weight_decay);

  void step(double lr);
  void zero_grad();
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> velocity_;
  double momentum_;
  double weight_decay_;
};

/// Bias-corrected Adam with weight decay folded into the gradient
/// (g <- g + wd*p).
class Adam {
 public:
  Adam(std::vector<Tensor> params, double beta1, double beta2, double weight_decay,
       double epsilon = 1e-8);

  void step(double lr);
  void zero_grad();
  std::int64_t steps_taken() const { return t_; }
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  double beta1_;
  double beta2_;
  double weight_decay_;
  double epsilon_;
  std::int64_t t_ = 0;
};

/// Drops parameters aliasing an earlier entry, keeping first occurrences.
std::vector<Tensor> unique_params(const std::vector<Tensor>& params);

}  // namespace dscnet
