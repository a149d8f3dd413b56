#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ethgnn/matrix.hpp"

namespace ethgnn {

struct Coo {
  std::size_t row;
  std::size_t col;
  double value;
};

// Square CSR adjacency over node ids [0, N). Within each row the column
// indices are strictly increasing; duplicate (i, j) entries are merged at
// construction by summing their values.
class SparseAdjacency {
 public:
  SparseAdjacency() : row_ptr_(1, 0) {}

  explicit SparseAdjacency(std::size_t n_nodes) : n_(n_nodes), row_ptr_(n_nodes + 1, 0) {}

  static SparseAdjacency from_coo(std::size_t n_nodes, std::vector<Coo> entries) {
    for (const auto& e : entries) {
      if (e.row >= n_nodes || e.col >= n_nodes) {
        throw std::invalid_argument("coo entry outside [0, n_nodes)");
      }
    }
    std::sort(entries.begin(), entries.end(), [](const Coo& a, const Coo& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseAdjacency adj(n_nodes);
    adj.col_idx_.reserve(entries.size());
    adj.values_.reserve(entries.size());
    std::size_t current_row = 0;
    for (const auto& e : entries) {
      if (!adj.col_idx_.empty() && e.row == current_row && e.col == adj.col_idx_.back() &&
          adj.row_ptr_[current_row] < adj.col_idx_.size()) {
        adj.values_.back() += e.value;  // merge duplicate edge
        continue;
      }
      while (current_row < e.row) adj.row_ptr_[++current_row] = adj.col_idx_.size();
      adj.col_idx_.push_back(e.col);
      adj.values_.push_back(e.value);
    }
    while (current_row < n_nodes) adj.row_ptr_[++current_row] = adj.col_idx_.size();
    return adj;
  }

  static SparseAdjacency identity(std::size_t n) {
    std::vector<Coo> entries;
    entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i) entries.push_back({i, i, 1.0});
    return from_coo(n, std::move(entries));
  }

  std::size_t n_nodes() const { return n_; }
  std::size_t nnz() const { return col_idx_.size(); }
  std::size_t degree(std::size_t i) const { return row_ptr_[i + 1] - row_ptr_[i]; }

  std::span<const std::size_t> neighbors(std::size_t i) const {
    return {col_idx_.data() + row_ptr_[i], degree(i)};
  }
  std::span<const double> weights(std::size_t i) const {
    return {values_.data() + row_ptr_[i], degree(i)};
  }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  void check_invariants() const {
    if (row_ptr_.size() != n_ + 1 || row_ptr_[0] != 0 || row_ptr_[n_] != col_idx_.size() ||
        values_.size() != col_idx_.size()) {
      throw std::logic_error("CSR bookkeeping arrays inconsistent");
    }
    for (std::size_t i = 0; i < n_; ++i) {
      if (row_ptr_[i] > row_ptr_[i + 1]) throw std::logic_error("row_ptr not monotone");
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        if (col_idx_[k] >= n_) throw std::logic_error("col index out of range");
        if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1]) {
          throw std::logic_error("row columns not strictly increasing");
        }
      }
    }
  }

  bool operator==(const SparseAdjacency&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

// Row i of the result is sum_j A_ij * x_j  (row-gather kernel).
inline Matrix spmm(const SparseAdjacency& adj, const Matrix& x) {
  if (adj.n_nodes() != x.rows()) throw std::invalid_argument("spmm shape mismatch");
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < adj.n_nodes(); ++i) {
    auto cols = adj.neighbors(i);
    auto wts = adj.weights(i);
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double w = wts[k];
      auto x_row = x.row(cols[k]);
      for (std::size_t d = 0; d < x.cols(); ++d) out_row[d] += w * x_row[d];
    }
  }
  return out;
}

// Aᵀ·x without materializing the transpose (scatter kernel); the adjoint of
// spmm, used by every backward pass.
inline Matrix spmm_transposed(const SparseAdjacency& adj, const Matrix& x) {
  if (adj.n_nodes() != x.rows()) throw std::invalid_argument("spmm_transposed shape mismatch");
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < adj.n_nodes(); ++i) {
    auto cols = adj.neighbors(i);
    auto wts = adj.weights(i);
    auto x_row = x.row(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double w = wts[k];
      auto out_row = out.row(cols[k]);
      for (std::size_t d = 0; d < x.cols(); ++d) out_row[d] += w * x_row[d];
    }
  }
  return out;
}

// Each nonempty row rescaled to sum 1; empty rows stay empty. Idempotent.
inline SparseAdjacency row_normalize(const SparseAdjacency& adj) {
  SparseAdjacency out = adj;
  for (std::size_t i = 0; i < adj.n_nodes(); ++i) {
    double sum = 0.0;
    for (double w : adj.weights(i)) sum += w;
    if (sum == 0.0) continue;
    for (std::size_t k = adj.row_ptr()[i]; k < adj.row_ptr()[i + 1]; ++k) {
      out.values()[k] = adj.values()[k] / sum;
    }
  }
  return out;
}

inline Matrix to_dense(const SparseAdjacency& adj) {
  Matrix out(adj.n_nodes(), adj.n_nodes());
  for (std::size_t i = 0; i < adj.n_nodes(); ++i) {
    auto cols = adj.neighbors(i);
    auto wts = adj.weights(i);
    for (std::size_t k = 0; k < cols.size(); ++k) out(i, cols[k]) = wts[k];
  }
  return out;
}

inline std::size_t max_degree(const SparseAdjacency& adj) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < adj.n_nodes(); ++i) best = std::max(best, adj.degree(i));
  return best;
}

}  // namespace ethgnn
