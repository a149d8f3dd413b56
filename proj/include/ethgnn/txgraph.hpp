#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ethgnn/blocks.hpp"
#include "ethgnn/sparse.hpp"

namespace ethgnn {

// Bijective address <-> dense node id map; ids are assigned contiguously in
// first-appearance order (from before to, blocks in input order).
class AddressIndex {
 public:
  std::size_t intern(const std::string& address) {
    auto [it, inserted] = ids_.try_emplace(address, addresses_.size());
    if (inserted) addresses_.push_back(address);
    return it->second;
  }

  std::size_t size() const { return addresses_.size(); }

  const std::string& address(std::size_t id) const { return addresses_.at(id); }

  std::optional<std::size_t> id(const std::string& address) const {
    auto it = ids_.find(address);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::vector<std::string>& addresses() const { return addresses_; }

 private:
  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<std::string> addresses_;
};

// Column affine transform fitted on the training graph and reused verbatim on
// held-out features.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> std_dev;  // 1.0 where a column is constant

  Matrix apply(const Matrix& raw) const {
    Matrix out = raw;
    for (std::size_t i = 0; i < raw.rows(); ++i) {
      for (std::size_t j = 0; j < raw.cols(); ++j) {
        out(i, j) = (raw(i, j) - mean[j]) / std_dev[j];
      }
    }
    return out;
  }

  static FeatureScaler fit(const Matrix& raw) {
    FeatureScaler s;
    s.mean.assign(raw.cols(), 0.0);
    s.std_dev.assign(raw.cols(), 1.0);
    if (raw.rows() == 0) return s;
    const double n = static_cast<double>(raw.rows());
    for (std::size_t j = 0; j < raw.cols(); ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < raw.rows(); ++i) sum += raw(i, j);
      s.mean[j] = sum / n;
      double ss = 0.0;
      for (std::size_t i = 0; i < raw.rows(); ++i) {
        const double d = raw(i, j) - s.mean[j];
        ss += d * d;
      }
      const double sd = std::sqrt(ss / n);
      s.std_dev[j] = sd < 1e-12 ? 1.0 : sd;  // constant column stays centered
    }
    return s;
  }
};

struct TxGraphOptions {
  bool directed = true;
  bool value_weighted = false;  // default edge weight is tx multiplicity
  bool add_self_loops = false;
};

// Raw (pre-standardization) feature columns, in order.
enum FeatureColumn : std::size_t {
  kOutDegree = 0,
  kInDegree = 1,
  kTxSent = 2,
  kTxReceived = 3,
  kLogEtherSent = 4,
  kLogEtherReceived = 5,
  kFeatureCount = 6,
};

struct TxGraph {
  AddressIndex index;
  SparseAdjacency adj;
  Matrix features;      // standardized, N x 6
  Matrix raw_features;  // pre-standardization, N x 6
  FeatureScaler scaler;
};

// One node per distinct address seen as sender or (present) receiver, one
// directed edge per transfer with duplicates merged by weight sum.
// Contract-creation transactions (no `to`) are skipped.
inline TxGraph build_transaction_graph(const std::vector<BlockRecord>& blocks,
                                       const TxGraphOptions& opts = {}) {
  TxGraph g;
  std::vector<Coo> entries;

  struct Accum {
    double tx_sent = 0, tx_received = 0, ether_sent = 0, ether_received = 0;
  };
  std::vector<Accum> accum;

  for (const auto& block : blocks) {
    for (const auto& tx : block.transactions) {
      if (!tx.to.has_value()) continue;
      const std::size_t u = g.index.intern(tx.from);
      const std::size_t v = g.index.intern(*tx.to);
      accum.resize(g.index.size());
      const double weight = opts.value_weighted ? tx.value.to_double() / 1e18 : 1.0;
      entries.push_back({u, v, weight});
      if (!opts.directed && u != v) entries.push_back({v, u, weight});

      const double ether = tx.value.to_double() / 1e18;
      accum[u].tx_sent += 1;
      accum[u].ether_sent += ether;
      accum[v].tx_received += 1;
      accum[v].ether_received += ether;
    }
  }

  const std::size_t n = g.index.size();
  if (opts.add_self_loops) {
    for (std::size_t i = 0; i < n; ++i) entries.push_back({i, i, 1.0});
  }
  g.adj = SparseAdjacency::from_coo(n, std::move(entries));

  g.raw_features = Matrix(n, kFeatureCount);
  for (std::size_t i = 0; i < n; ++i) {
    g.raw_features(i, kOutDegree) = static_cast<double>(g.adj.degree(i));
    g.raw_features(i, kTxSent) = accum[i].tx_sent;
    g.raw_features(i, kTxReceived) = accum[i].tx_received;
    g.raw_features(i, kLogEtherSent) = std::log1p(accum[i].ether_sent);
    g.raw_features(i, kLogEtherReceived) = std::log1p(accum[i].ether_received);
  }
  for (std::size_t i = 0; i < n; ++i) {  // in-degree = distinct senders into i
    for (std::size_t j : g.adj.neighbors(i)) {
      g.raw_features(j, kInDegree) += 1;
    }
  }
  if (!opts.directed) {
    // Symmetrized adjacency makes out/in structural degree identical; keep
    // the directional tx counts as the distinguishing columns.
    for (std::size_t i = 0; i < n; ++i) g.raw_features(i, kInDegree) = g.raw_features(i, kOutDegree);
  }

  g.scaler = FeatureScaler::fit(g.raw_features);
  g.features = g.scaler.apply(g.raw_features);
  return g;
}

// Binary proxy labels: 1 where a node's total transaction count (sent plus
// received) sits in the top quartile. Computed from raw counts, never the
// standardized inputs.
inline std::vector<int> high_activity_labels(const Matrix& raw_features) {
  const std::size_t n = raw_features.rows();
  std::vector<double> activity(n);
  for (std::size_t i = 0; i < n; ++i) {
    activity[i] = raw_features(i, kTxSent) + raw_features(i, kTxReceived);
  }
  std::vector<double> sorted = activity;
  std::sort(sorted.begin(), sorted.end());
  const double cutoff = n == 0 ? 0.0 : sorted[(3 * n) / 4];
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = activity[i] >= cutoff ? 1 : 0;
  return labels;
}

// Inputs for the activity-label task: the tx-count columns are the label
// source, so they are dropped to avoid leakage.
inline Matrix select_columns(const Matrix& m, const std::vector<std::size_t>& cols) {
  Matrix out(m.rows(), cols.size());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(i, j) = m(i, cols[j]);
    }
  }
  return out;
}

inline Matrix classifier_inputs(const TxGraph& g) {
  return select_columns(g.features, {kOutDegree, kInDegree, kLogEtherSent, kLogEtherReceived});
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

// Text export: header "N nnz D", CSR row_ptr / col_idx / values lines, then
// one feature row per node. Doubles use shortest round-trip formatting, so
// import is exact.
inline void write_graph_text(std::ostream& out, const SparseAdjacency& adj,
                             const Matrix& features) {
  out << adj.n_nodes() << ' ' << adj.nnz() << ' ' << features.cols() << '\n';
  for (std::size_t i = 0; i < adj.row_ptr().size(); ++i) {
    out << (i ? " " : "") << adj.row_ptr()[i];
  }
  out << '\n';
  for (std::size_t i = 0; i < adj.nnz(); ++i) out << (i ? " " : "") << adj.col_idx()[i];
  out << '\n';
  for (std::size_t i = 0; i < adj.nnz(); ++i) {
    out << (i ? " " : "") << detail::fmt_double(adj.values()[i]);
  }
  out << '\n';
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (std::size_t j = 0; j < features.cols(); ++j) {
      out << (j ? " " : "") << detail::fmt_double(features(i, j));
    }
    out << '\n';
  }
}

inline void write_graph_text(const std::filesystem::path& path, const SparseAdjacency& adj,
                             const Matrix& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open graph file for writing: " + path.string());
  write_graph_text(out, adj, features);
}

inline std::pair<SparseAdjacency, Matrix> read_graph_text(std::istream& in) {
  std::size_t n = 0, nnz = 0, d = 0;
  if (!(in >> n >> nnz >> d)) throw ParseError("graph text: bad header");
  std::vector<std::size_t> row_ptr(n + 1);
  for (auto& v : row_ptr) {
    if (!(in >> v)) throw ParseError("graph text: truncated row_ptr");
  }
  std::vector<Coo> entries(nnz);
  std::vector<std::size_t> cols(nnz);
  for (auto& c : cols) {
    if (!(in >> c)) throw ParseError("graph text: truncated col_idx");
  }
  for (std::size_t k = 0; k < nnz; ++k) {
    double v;
    if (!(in >> v)) throw ParseError("graph text: truncated values");
    entries[k].value = v;
    entries[k].col = cols[k];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) entries[k].row = i;
  }
  Matrix features(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (!(in >> features(i, j))) throw ParseError("graph text: truncated features");
    }
  }
  auto adj = SparseAdjacency::from_coo(n, std::move(entries));
  return {std::move(adj), std::move(features)};
}

inline std::pair<SparseAdjacency, Matrix> read_graph_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open graph file: " + path.string());
  return read_graph_text(in);
}

// Debug surface: one edge per line as {"from","to","weight"} with addresses.
inline void write_edge_ndjson(std::ostream& out, const AddressIndex& index,
                              const SparseAdjacency& adj) {
  for (std::size_t i = 0; i < adj.n_nodes(); ++i) {
    auto cols = adj.neighbors(i);
    auto wts = adj.weights(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      ordered_json j;
      j["from"] = index.address(i);
      j["to"] = index.address(cols[k]);
      j["weight"] = wts[k];
      out << j.dump() << '\n';
    }
  }
}

}  // namespace ethgnn
