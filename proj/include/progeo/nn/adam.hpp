#pragma once

#include <cmath>
#include <vector>

#include "progeo/nn/tensor.hpp"

namespace progeo::nn {

// Adam with bias correction. Parameters that received no gradient in a step
// are left untouched (their moments do not decay either).
template <typename S>
class AdamT {
 public:
  explicit AdamT(std::vector<TensorPtrT<S>> params, S lr, S beta1 = S(0.9),
                 S beta2 = S(0.999), S eps = S(1e-8))
      : params_(std::move(params)), base_lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    steps_.assign(params_.size(), 0);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m_[i].setZero(params_[i]->rows(), params_[i]->cols());
      v_[i].setZero(params_[i]->rows(), params_[i]->cols());
    }
  }

  void zero_grad() {
    for (auto& p : params_) p->zero_grad();
  }

  void set_lr_scale(S s) { lr_scale_ = s; }
  S lr() const { return base_lr_ * lr_scale_; }

  void step() {
    const S lr = base_lr_ * lr_scale_;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      TensorT<S>& p = *params_[i];
      if (!p.requires_grad || p.grad.size() == 0) continue;
      steps_[i] += 1;
      const S t = static_cast<S>(steps_[i]);
      m_[i] = beta1_ * m_[i] + (S(1) - beta1_) * p.grad;
      v_[i] = beta2_ * v_[i].array() + (S(1) - beta2_) * p.grad.array().square();
      const S bc1 = S(1) - std::pow(beta1_, t);
      const S bc2 = S(1) - std::pow(beta2_, t);
      p.value.array() -=
          lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + eps_);
    }
  }

  const std::vector<TensorPtrT<S>>& params() const { return params_; }

 private:
  std::vector<TensorPtrT<S>> params_;
  std::vector<MatX<S>> m_;
  std::vector<MatX<S>> v_;
  std::vector<long> steps_;
  S base_lr_;
  S lr_scale_ = S(1);
  S beta1_;
  S beta2_;
  S eps_;
};

using Adam = AdamT<float>;

// Cosine annealing from full lr at epoch 0 down to 0 at total_epochs.
template <typename S>
S cosine_lr_scale(int epoch, int total_epochs) {
  if (total_epochs <= 0) return S(1);
  const double frac = static_cast<double>(epoch) / static_cast<double>(total_epochs);
  return static_cast<S>(0.5 * (1.0 + std::cos(3.14159265358979323846 * frac)));
}

}  // namespace progeo::nn
