#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ethgnn/activations.hpp"
#include "ethgnn/sampling.hpp"
#include "ethgnn/sparse.hpp"

namespace ethgnn {

enum class LayerKind { GraphConv, Sage, Gat, GatRl };

// Per-layer trainable parameters. attn and skip_scale are only populated for
// the attention layers.
struct LayerParams {
  Matrix w;                        // d_in x d_out
  std::vector<double> b;           // d_out
  std::vector<double> attn;        // 2*d_out, [source half | target half]
  std::vector<double> skip_scale;  // d_out, elementwise output scale (GatRl)
};

struct LayerGrads {
  Matrix w;
  std::vector<double> b;
  std::vector<double> attn;
  std::vector<double> skip_scale;

  static LayerGrads zeros_like(const LayerParams& p) {
    LayerGrads g;
    g.w = Matrix(p.w.rows(), p.w.cols());
    g.b.assign(p.b.size(), 0.0);
    g.attn.assign(p.attn.size(), 0.0);
    g.skip_scale.assign(p.skip_scale.size(), 0.0);
    return g;
  }
};

struct LayerConfig {
  LayerKind kind = LayerKind::GraphConv;
  std::size_t d_in = 0;
  std::size_t d_out = 0;
  Activation act;
  double attn_slope = 0.2;              // LeakyReLU inside the attention score
  Pooling pooling = Pooling::Sum;       // Sage
  SamplerConfig sampler;                // Sage
};

// Neighbor-softmax attention sharing the adjacency sparsity pattern. `scores`
// keeps the pre-softmax e_ij aligned with the alpha value layout.
struct AttentionMatrix {
  SparseAdjacency alpha;
  std::vector<double> scores;
};

// Everything a backward pass needs from the forward pass.
struct LayerCache {
  Matrix input;                      // H
  Matrix transformed;                // T = H·W (attention layers)
  Matrix aggregated;                 // A·H or S·H (conv/sage)
  Matrix pre_act;                    // Z
  Matrix activated;                  // act(Z) (GatRl only)
  SparseAdjacency sampled;           // Sage epoch sample
  AttentionMatrix attention;
  std::vector<double> score_src;     // c_i = <a_src, T_i>
  std::vector<double> score_dst;     // d_i = <a_dst, T_i>
};

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

inline void check_shapes(const LayerParams& p, const SparseAdjacency& adj, const Matrix& h,
                         bool attention) {
  require(adj.n_nodes() == h.rows(), "layer: adjacency/embedding row mismatch");
  require(p.w.rows() == h.cols(), "layer: weight d_in mismatch");
  require(p.b.empty() || p.b.size() == p.w.cols(), "layer: bias size mismatch");
  if (attention) {
    require(p.attn.size() == 2 * p.w.cols(), "layer: attention vector must be 2*d_out");
  }
}

inline Matrix add_bias(Matrix m, const std::vector<double>& b) {
  if (b.empty()) return m;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) row[j] += b[j];
  }
  return m;
}

inline std::vector<double> column_sums(const Matrix& m) {
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += m(i, j);
  }
  return out;
}

inline Matrix act_backward(const Activation& act, const Matrix& pre_act,
                           const Matrix& grad_out) {
  Matrix out(grad_out.rows(), grad_out.cols());
  for (std::size_t i = 0; i < out.data().size(); ++i) {
    out.data()[i] = grad_out.data()[i] * act_grad(act, pre_act.data()[i]);
  }
  return out;
}

}  // namespace detail

// h'_i = act( sum_{j in N(i)} A_ij · (W·h_j) + b ); unnormalized neighbor sum,
// so degree-0 nodes get act(b).
inline Matrix graphconv_forward(const LayerParams& params, const SparseAdjacency& adj,
                                const Matrix& h, const Activation& act,
                                LayerCache* cache = nullptr) {
  detail::check_shapes(params, adj, h, false);
  Matrix aggregated = spmm(adj, h);
  Matrix pre = detail::add_bias(matmul(aggregated, params.w), params.b);
  Matrix out = act_apply(act, pre);
  if (cache) {
    cache->input = h;
    cache->aggregated = std::move(aggregated);
    cache->pre_act = std::move(pre);
  }
  return out;
}

// Sampled-neighborhood aggregation: pool the epoch's K-sample (sum pooling
// divides by K, mean pooling by the actual sample size), then transform.
inline Matrix sage_forward(const LayerParams& params, const SparseAdjacency& adj,
                           const Matrix& h, const Activation& act, const SamplerConfig& cfg,
                           Pooling pooling, std::uint64_t epoch = 0,
                           LayerCache* cache = nullptr) {
  detail::check_shapes(params, adj, h, false);
  detail::require(cfg.k >= 1, "sage: sampler k must be >= 1");
  SparseAdjacency sampled = build_sampled_adjacency(adj, cfg, pooling, epoch);
  Matrix pooled = spmm(sampled, h);
  Matrix pre = detail::add_bias(matmul(pooled, params.w), params.b);
  Matrix out = act_apply(act, pre);
  if (cache) {
    cache->input = h;
    cache->aggregated = std::move(pooled);
    cache->pre_act = std::move(pre);
    cache->sampled = std::move(sampled);
  }
  return out;
}

// Attention coefficients: e_ij = LeakyReLU(a^T [W·h_i || W·h_j]) softmaxed
// over each node's neighbor set, stabilized by the row max. Degree-0 rows
// stay empty.
inline AttentionMatrix gat_attention(const LayerParams& params, const SparseAdjacency& adj,
                                     const Matrix& h, double slope,
                                     LayerCache* cache = nullptr) {
  detail::check_shapes(params, adj, h, true);
  const std::size_t d_out = params.w.cols();
  Matrix transformed = matmul(h, params.w);

  std::vector<double> score_src(adj.n_nodes()), score_dst(adj.n_nodes());
  for (std::size_t i = 0; i < adj.n_nodes(); ++i) {
    double c = 0.0, d = 0.0;
    auto t_row = transformed.row(i);
    for (std::size_t k = 0; k < d_out; ++k) {
      c += params.attn[k] * t_row[k];
      d += params.attn[d_out + k] * t_row[k];
    }
    score_src[i] = c;
    score_dst[i] = d;
  }

  const Activation leaky{Act::LeakyReLU, slope};
  AttentionMatrix attn;
  attn.alpha = adj;
  attn.scores.resize(adj.nnz());
  auto& alpha_values = attn.alpha.values();
  for (std::size_t i = 0; i < adj.n_nodes(); ++i) {
    const std::size_t begin = adj.row_ptr()[i];
    const std::size_t end = adj.row_ptr()[i + 1];
    if (begin == end) continue;
    double row_max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = begin; k < end; ++k) {
      const double e = act_apply(leaky, score_src[i] + score_dst[adj.col_idx()[k]]);
      attn.scores[k] = e;
      row_max = std::max(row_max, e);
    }
    double denom = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      alpha_values[k] = std::exp(attn.scores[k] - row_max);
      denom += alpha_values[k];
    }
    for (std::size_t k = begin; k < end; ++k) alpha_values[k] /= denom;
  }

  if (cache) {
    cache->transformed = std::move(transformed);
    cache->score_src = std::move(score_src);
    cache->score_dst = std::move(score_dst);
  }
  return attn;
}

// Plain attention layer: h'_i = act( sum_j alpha_ij (W·h_j) ), no bias.
inline Matrix gat_forward(const LayerParams& params, const SparseAdjacency& adj,
                          const Matrix& h, const Activation& act, double slope = 0.2,
                          LayerCache* cache = nullptr) {
  LayerCache local;
  LayerCache* c = cache ? cache : &local;
  c->attention = gat_attention(params, adj, h, slope, c);
  Matrix pre = spmm(c->attention.alpha, c->transformed);
  Matrix out = act_apply(act, pre);
  if (cache) {
    cache->input = h;
    cache->pre_act = std::move(pre);
  }
  return out;
}

// Attention layer with bias, identity residual (added when d_in == d_out, as
// W·h_i), and a learned elementwise output scale:
//   h'_i = act( sum_j alpha_ij (W·h_j) [+ W·h_i] + b ) ⊙ skip_scale
inline Matrix gatrl_forward(const LayerParams& params, const SparseAdjacency& adj,
                            const Matrix& h, const Activation& act, double slope = 0.2,
                            LayerCache* cache = nullptr) {
  detail::require(params.skip_scale.size() == params.w.cols(),
                  "gatrl: skip_scale must have d_out entries");
  LayerCache local;
  LayerCache* c = cache ? cache : &local;
  c->attention = gat_attention(params, adj, h, slope, c);
  Matrix pre = spmm(c->attention.alpha, c->transformed);
  if (params.w.rows() == params.w.cols()) {
    add_inplace(pre, c->transformed);  // residual
  }
  pre = detail::add_bias(std::move(pre), params.b);
  Matrix activated = act_apply(act, pre);
  Matrix out = activated;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    for (std::size_t j = 0; j < out.cols(); ++j) row[j] *= params.skip_scale[j];
  }
  if (cache) {
    cache->input = h;
    cache->pre_act = std::move(pre);
    cache->activated = std::move(activated);
  }
  return out;
}

inline Matrix layer_forward(const LayerConfig& cfg, const LayerParams& params,
                            const SparseAdjacency& adj, const Matrix& h, std::uint64_t epoch,
                            LayerCache* cache = nullptr) {
  switch (cfg.kind) {
    case LayerKind::GraphConv:
      return graphconv_forward(params, adj, h, cfg.act, cache);
    case LayerKind::Sage:
      return sage_forward(params, adj, h, cfg.act, cfg.sampler, cfg.pooling, epoch, cache);
    case LayerKind::Gat:
      return gat_forward(params, adj, h, cfg.act, cfg.attn_slope, cache);
    case LayerKind::GatRl:
      return gatrl_forward(params, adj, h, cfg.act, cfg.attn_slope, cache);
  }
  throw std::logic_error("unknown layer kind");
}

namespace detail {

// Gradient flowing through the attention softmax and scores back onto T and
// the attention vector. dT accumulates in place.
inline void attention_backward(const LayerParams& params, const SparseAdjacency& adj,
                               const LayerCache& cache, const Matrix& d_pre, double slope,
                               Matrix& d_transformed, LayerGrads& grads) {
  const std::size_t d_out = params.w.cols();
  const auto& alpha = cache.attention.alpha;
  const Matrix& transformed = cache.transformed;

  std::vector<double> d_score_src(adj.n_nodes(), 0.0);
  std::vector<double> d_score_dst(adj.n_nodes(), 0.0);

  for (std::size_t i = 0; i < adj.n_nodes(); ++i) {
    const std::size_t begin = adj.row_ptr()[i];
    const std::size_t end = adj.row_ptr()[i + 1];
    if (begin == end) continue;

    // d alpha_ij = <dZ_i, T_j>, then softmax backward within the row.
    double inner = 0.0;  // sum_k alpha_ik * d_alpha_ik
    auto dz_row = d_pre.row(i);
    std::vector<double> d_alpha(end - begin);
    for (std::size_t k = begin; k < end; ++k) {
      auto t_row = transformed.row(adj.col_idx()[k]);
      double dot = 0.0;
      for (std::size_t d = 0; d < d_out; ++d) dot += dz_row[d] * t_row[d];
      d_alpha[k - begin] = dot;
      inner += alpha.values()[k] * dot;
    }
    for (std::size_t k = begin; k < end; ++k) {
      const double d_e = alpha.values()[k] * (d_alpha[k - begin] - inner);
      const double u = cache.score_src[i] + cache.score_dst[adj.col_idx()[k]];
      const double d_u = d_e * (u > 0.0 ? 1.0 : slope);
      d_score_src[i] += d_u;
      d_score_dst[adj.col_idx()[k]] += d_u;
    }
  }

  // c_i = <a_src, T_i>, d_i = <a_dst, T_i>.
  for (std::size_t i = 0; i < adj.n_nodes(); ++i) {
    auto t_row = transformed.row(i);
    auto dt_row = d_transformed.row(i);
    for (std::size_t d = 0; d < d_out; ++d) {
      grads.attn[d] += d_score_src[i] * t_row[d];
      grads.attn[d_out + d] += d_score_dst[i] * t_row[d];
      dt_row[d] += d_score_src[i] * params.attn[d] + d_score_dst[i] * params.attn[d_out + d];
    }
  }
}

}  // namespace detail

// Exact analytic gradients for one layer. Returns dL/d(input); fills `grads`.
inline Matrix layer_backward(const LayerConfig& cfg, const LayerParams& params,
                             const SparseAdjacency& adj, const LayerCache& cache,
                             const Matrix& grad_out, LayerGrads& grads) {
  grads = LayerGrads::zeros_like(params);

  switch (cfg.kind) {
    case LayerKind::GraphConv:
    case LayerKind::Sage: {
      const Matrix d_pre = detail::act_backward(cfg.act, cache.pre_act, grad_out);
      grads.b = detail::column_sums(d_pre);
      grads.w = matmul(transpose(cache.aggregated), d_pre);
      const Matrix d_aggregated = matmul(d_pre, transpose(params.w));
      const SparseAdjacency& op = cfg.kind == LayerKind::Sage ? cache.sampled : adj;
      return spmm_transposed(op, d_aggregated);
    }

    case LayerKind::Gat: {
      const Matrix d_pre = detail::act_backward(cfg.act, cache.pre_act, grad_out);
      Matrix d_transformed = spmm_transposed(cache.attention.alpha, d_pre);
      detail::attention_backward(params, adj, cache, d_pre, cfg.attn_slope, d_transformed,
                                 grads);
      grads.w = matmul(transpose(cache.input), d_transformed);
      return matmul(d_transformed, transpose(params.w));
    }

    case LayerKind::GatRl: {
      // out = act(pre) ⊙ s
      Matrix d_activated(grad_out.rows(), grad_out.cols());
      for (std::size_t i = 0; i < grad_out.rows(); ++i) {
        for (std::size_t j = 0; j < grad_out.cols(); ++j) {
          d_activated(i, j) = grad_out(i, j) * params.skip_scale[j];
          grads.skip_scale[j] += grad_out(i, j) * cache.activated(i, j);
        }
      }
      const Matrix d_pre = detail::act_backward(cfg.act, cache.pre_act, d_activated);
      grads.b = detail::column_sums(d_pre);
      Matrix d_transformed = spmm_transposed(cache.attention.alpha, d_pre);
      if (params.w.rows() == params.w.cols()) {
        add_inplace(d_transformed, d_pre);  // residual path
      }
      detail::attention_backward(params, adj, cache, d_pre, cfg.attn_slope, d_transformed,
                                 grads);
      grads.w = matmul(transpose(cache.input), d_transformed);
      return matmul(d_transformed, transpose(params.w));
    }
  }
  throw std::logic_error("unknown layer kind");
}

}  // namespace ethgnn
