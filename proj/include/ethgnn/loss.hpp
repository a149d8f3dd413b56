#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ethgnn/matrix.hpp"

namespace ethgnn {

// Max-subtracted softmax of one logit row.
inline std::vector<double> softmax_row(std::span<const double> logits) {
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  std::vector<double> out(logits.size());
  double denom = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - m);
    denom += out[k];
  }
  for (double& v : out) v /= denom;
  return out;
}

// Mean negative log-likelihood over masked nodes.
inline double masked_cross_entropy(const Matrix& logits, const std::vector<int>& labels,
                                   const std::vector<bool>& mask) {
  if (logits.rows() != labels.size() || logits.rows() != mask.size()) {
    throw std::invalid_argument("cross entropy: row/label/mask size mismatch");
  }
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (!mask[i]) continue;
    const auto p = softmax_row(logits.row(i));
    total += -std::log(p[static_cast<std::size_t>(labels[i])]);
    ++count;
  }
  if (count == 0) throw std::invalid_argument("cross entropy: empty mask");
  return total / static_cast<double>(count);
}

struct MaskedLoss {
  double loss;
  Matrix grad_logits;  // zero outside the mask
};

inline MaskedLoss masked_cross_entropy_with_grad(const Matrix& logits,
                                                 const std::vector<int>& labels,
                                                 const std::vector<bool>& mask) {
  MaskedLoss out{0.0, Matrix(logits.rows(), logits.cols())};
  std::size_t count = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (mask[i]) ++count;
  }
  if (count == 0) throw std::invalid_argument("cross entropy: empty mask");
  const double scale = 1.0 / static_cast<double>(count);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (!mask[i]) continue;
    const auto p = softmax_row(logits.row(i));
    const auto y = static_cast<std::size_t>(labels[i]);
    total += -std::log(p[y]);
    auto g = out.grad_logits.row(i);
    for (std::size_t k = 0; k < p.size(); ++k) {
      g[k] = (p[k] - (k == y ? 1.0 : 0.0)) * scale;
    }
  }
  out.loss = total * scale;
  return out;
}

// Fraction of masked nodes whose argmax logit equals the label; argmax ties
// resolve to the lowest class id.
inline double masked_accuracy(const Matrix& logits, const std::vector<int>& labels,
                              const std::vector<bool>& mask) {
  std::size_t correct = 0, count = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (!mask[i]) continue;
    ++count;
    auto row = logits.row(i);
    std::size_t best = 0;
    for (std::size_t k = 1; k < row.size(); ++k) {
      if (row[k] > row[best]) best = k;
    }
    if (static_cast<int>(best) == labels[i]) ++correct;
  }
  if (count == 0) throw std::invalid_argument("accuracy: empty mask");
  return static_cast<double>(correct) / static_cast<double>(count);
}

}  // namespace ethgnn
