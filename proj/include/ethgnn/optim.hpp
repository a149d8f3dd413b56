#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ethgnn {

enum class OptimizerKind { Sgd, Adam };

class Sgd {
 public:
  explicit Sgd(double lr) : lr_(lr) {}

  void step(std::vector<double>& params, const std::vector<double>& grads) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grads[i];
  }

 private:
  double lr_;
};

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<double>& params, const std::vector<double>& grads) {
    if (m_.empty()) {
      m_.assign(params.size(), 0.0);
      v_.assign(params.size(), 0.0);
    }
    if (m_.size() != params.size()) throw std::invalid_argument("adam: parameter size changed");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
      params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  std::uint64_t t_ = 0;
};

// Either optimizer behind one interface; training loops hold this.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr) : kind_(kind), sgd_(lr), adam_(lr) {}

  void step(std::vector<double>& params, const std::vector<double>& grads) {
    if (kind_ == OptimizerKind::Sgd) {
      sgd_.step(params, grads);
    } else {
      adam_.step(params, grads);
    }
  }

 private:
  OptimizerKind kind_;
  Sgd sgd_;
  Adam adam_;
};

}  // namespace ethgnn
