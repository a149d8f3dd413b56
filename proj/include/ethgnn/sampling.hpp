#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ethgnn/rng.hpp"
#include "ethgnn/sparse.hpp"

namespace ethgnn {

struct SamplerConfig {
  std::size_t k = 1;       // neighbors sampled per node, >= 1
  std::uint64_t seed = 0;
};

enum class Pooling { Sum, Mean };

// Uniform sample without replacement of min(k, deg(node)) neighbors,
// deterministic in (cfg.seed, node, epoch). Returned sorted ascending.
// Draws come from a splitmix64 stream keyed by (seed, node, epoch); the
// sampler runs once per node per epoch, so the stream must be cheap to start.
inline std::vector<std::size_t> sample_neighbors(const SparseAdjacency& adj, std::size_t node,
                                                 const SamplerConfig& cfg,
                                                 std::uint64_t epoch = 0) {
  auto nbrs = adj.neighbors(node);
  std::vector<std::size_t> pool(nbrs.begin(), nbrs.end());
  const std::size_t m = std::min(cfg.k, pool.size());
  if (m == 0) return {};

  std::uint64_t stream = mix3(cfg.seed, node, epoch);
  for (std::size_t t = 0; t < m; ++t) {  // partial Fisher-Yates
    const std::size_t j = t + static_cast<std::size_t>(splitmix64(stream) % (pool.size() - t));
    std::swap(pool[t], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

// The whole-layer sampled aggregation operator: row i holds the epoch's
// sampled neighbors of i, weighted 1/k under sum pooling and 1/|sample|
// under mean pooling.
inline SparseAdjacency build_sampled_adjacency(const SparseAdjacency& adj,
                                               const SamplerConfig& cfg, Pooling pooling,
                                               std::uint64_t epoch) {
  std::vector<Coo> entries;
  for (std::size_t i = 0; i < adj.n_nodes(); ++i) {
    const auto sample = sample_neighbors(adj, i, cfg, epoch);
    if (sample.empty()) continue;
    const double w = pooling == Pooling::Sum ? 1.0 / static_cast<double>(cfg.k)
                                             : 1.0 / static_cast<double>(sample.size());
    for (std::size_t j : sample) entries.push_back({i, j, w});
  }
  return SparseAdjacency::from_coo(adj.n_nodes(), std::move(entries));
}

}  // namespace ethgnn
