#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "ethgnn/matrix.hpp"
#include "ethgnn/rng.hpp"

namespace ethgnn {

// Two-layer perceptron with tanh hidden units: y = (tanh(x·W1 + b1))·W2 + b2.
// Small enough that forward and backward are explicit loops.
struct Mlp {
  Matrix w1;  // d_in x hidden
  std::vector<double> b1;
  Matrix w2;  // hidden x d_out
  std::vector<double> b2;

  static Mlp init(std::size_t d_in, std::size_t hidden, std::size_t d_out, Rng& rng) {
    Mlp m;
    const double s1 = std::sqrt(6.0 / static_cast<double>(d_in + hidden));
    const double s2 = std::sqrt(6.0 / static_cast<double>(hidden + d_out));
    m.w1 = Matrix(d_in, hidden);
    for (double& v : m.w1.data()) v = rng.uniform(-s1, s1);
    m.b1.assign(hidden, 0.0);
    m.w2 = Matrix(hidden, d_out);
    for (double& v : m.w2.data()) v = rng.uniform(-s2, s2);
    m.b2.assign(d_out, 0.0);
    return m;
  }

  struct Cache {
    std::vector<double> input;
    std::vector<double> hidden;  // tanh outputs
  };

  std::vector<double> forward(std::span<const double> x, Cache* cache = nullptr) const {
    std::vector<double> h(w1.cols());
    for (std::size_t j = 0; j < w1.cols(); ++j) {
      double z = b1[j];
      for (std::size_t i = 0; i < w1.rows(); ++i) z += x[i] * w1(i, j);
      h[j] = std::tanh(z);
    }
    std::vector<double> y(w2.cols());
    for (std::size_t k = 0; k < w2.cols(); ++k) {
      double z = b2[k];
      for (std::size_t j = 0; j < w2.rows(); ++j) z += h[j] * w2(j, k);
      y[k] = z;
    }
    if (cache) {
      cache->input.assign(x.begin(), x.end());
      cache->hidden = std::move(h);
    }
    return y;
  }

  struct Grads {
    Matrix w1;
    std::vector<double> b1;
    Matrix w2;
    std::vector<double> b2;

    static Grads zeros_like(const Mlp& m) {
      Grads g;
      g.w1 = Matrix(m.w1.rows(), m.w1.cols());
      g.b1.assign(m.b1.size(), 0.0);
      g.w2 = Matrix(m.w2.rows(), m.w2.cols());
      g.b2.assign(m.b2.size(), 0.0);
      return g;
    }
  };

  // Accumulates into g; returns nothing (inputs are environment states, never
  // differentiated through).
  void backward(const Cache& cache, std::span<const double> d_y, Grads& g) const {
    std::vector<double> d_h(w2.rows(), 0.0);
    for (std::size_t k = 0; k < w2.cols(); ++k) {
      g.b2[k] += d_y[k];
      for (std::size_t j = 0; j < w2.rows(); ++j) {
        g.w2(j, k) += cache.hidden[j] * d_y[k];
        d_h[j] += w2(j, k) * d_y[k];
      }
    }
    for (std::size_t j = 0; j < w1.cols(); ++j) {
      const double t = cache.hidden[j];
      const double d_z = d_h[j] * (1.0 - t * t);  // tanh'
      g.b1[j] += d_z;
      for (std::size_t i = 0; i < w1.rows(); ++i) {
        g.w1(i, j) += cache.input[i] * d_z;
      }
    }
  }

  std::vector<double> flatten() const {
    std::vector<double> out;
    out.insert(out.end(), w1.data().begin(), w1.data().end());
    out.insert(out.end(), b1.begin(), b1.end());
    out.insert(out.end(), w2.data().begin(), w2.data().end());
    out.insert(out.end(), b2.begin(), b2.end());
    return out;
  }

  std::size_t unflatten(const std::vector<double>& flat, std::size_t pos) {
    auto take = [&](std::vector<double>& dst) {
      std::copy(flat.begin() + pos, flat.begin() + pos + dst.size(), dst.begin());
      pos += dst.size();
    };
    take(w1.data());
    take(b1);
    take(w2.data());
    take(b2);
    return pos;
  }

  static std::vector<double> flatten_grads(const Grads& g) {
    std::vector<double> out;
    out.insert(out.end(), g.w1.data().begin(), g.w1.data().end());
    out.insert(out.end(), g.b1.begin(), g.b1.end());
    out.insert(out.end(), g.w2.data().begin(), g.w2.data().end());
    out.insert(out.end(), g.b2.begin(), g.b2.end());
    return out;
  }
};

}  // namespace ethgnn
