#include "dscnet/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dscnet {

namespace {

void require_grads(const std::vector<Tensor>& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].has_grad()) {
      throw std::logic_error("optimizer step: parameter " + std::to_string(i) + " has no gradient");
    }
  }
}

}  // namespace

std::vector<Tensor> unique_params(const std::vector<Tensor>& params) {
  std::vector<Tensor> out;
  for (const Tensor& p : params) {
    bool seen = false;
    for (const Tensor& q : out) seen = seen || q.shares_storage_with(p);
    if (!seen) out.push_back(p);
  }
  return out;
}

SgdMomentum::SgdMomentum(std::vector<Tensor> params, double momentum, double weight_decay)
    : params_(unique_params(params)), momentum_(momentum), weight_decay_(weight_decay) {
  for (const Tensor& p : params_) velocity_.emplace_back(p.size(), 0.0);
}

void SgdMomentum::step(double lr) {
  require_grads(params_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto p = params_[i].data();
    auto g = std::as_const(params_[i]).grad();
    auto& v = velocity_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      v[j] = momentum_ * v[j] + g[j] + weight_decay_ * p[j];
      p[j] -= lr * v[j];
    }
  }
}

void SgdMomentum::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

Adam::Adam(std::vector<Tensor> params, double beta1, double beta2, double weight_decay,
           double epsilon)
    : params_(unique_params(params)),
      beta1_(beta1),
      beta2_(beta2),
      weight_decay_(weight_decay),
      epsilon_(epsilon) {
  for (const Tensor& p : params_) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void Adam::step(double lr) {
  require_grads(params_);
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto p = params_[i].data();
    auto g = std::as_const(params_[i]).grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = g[j] + weight_decay_ * p[j];
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * gj;
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * gj * gj;
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      p[j] -= lr * mhat / (std::sqrt(vhat) + epsilon_);
    }
  }
}

void Adam::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

}  // namespace dscnet
