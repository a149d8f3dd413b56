#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "ethgnn/matrix.hpp"

namespace ethgnn {

enum class Act { ReLU, LeakyReLU, Sigmoid, Identity };

struct Activation {
  Act kind = Act::ReLU;
  double slope = 0.01;  // LeakyReLU only, in (0,1)

  void validate() const {
    if (kind == Act::LeakyReLU && (slope <= 0.0 || slope >= 1.0)) {
      throw std::invalid_argument("leaky slope must lie in (0,1)");
    }
  }
};

inline double act_apply(const Activation& a, double x) {
  switch (a.kind) {
    case Act::ReLU: return x > 0.0 ? x : 0.0;
    case Act::LeakyReLU: return x > 0.0 ? x : a.slope * x;
    case Act::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Act::Identity: return x;
  }
  return x;
}

// Derivative at the pre-activation value.
inline double act_grad(const Activation& a, double x) {
  switch (a.kind) {
    case Act::ReLU: return x > 0.0 ? 1.0 : 0.0;
    case Act::LeakyReLU: return x > 0.0 ? 1.0 : a.slope;
    case Act::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
    case Act::Identity: return 1.0;
  }
  return 1.0;
}

inline Matrix act_apply(const Activation& a, const Matrix& m) {
  Matrix out = m;
  for (double& v : out.data()) v = act_apply(a, v);
  return out;
}

inline const char* act_name(Act kind) {
  switch (kind) {
    case Act::ReLU: return "relu";
    case Act::LeakyReLU: return "leaky_relu";
    case Act::Sigmoid: return "sigmoid";
    case Act::Identity: return "identity";
  }
  return "relu";
}

inline Act act_from_name(const std::string& name) {
  if (name == "relu") return Act::ReLU;
  if (name == "leaky_relu") return Act::LeakyReLU;
  if (name == "sigmoid") return Act::Sigmoid;
  if (name == "identity") return Act::Identity;
  throw std::invalid_argument("unknown activation: " + name);
}

}  // namespace ethgnn
