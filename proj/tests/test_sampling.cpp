#include <gtest/gtest.h>

#include <map>
#include <set>

#include "ethgnn/sampling.hpp"

using namespace ethgnn;

namespace {

// Star: node 0 connected to 1..degree.
SparseAdjacency star(std::size_t degree) {
  std::vector<Coo> entries;
  for (std::size_t j = 1; j <= degree; ++j) entries.push_back({0, j, 1.0});
  return SparseAdjacency::from_coo(degree + 1, std::move(entries));
}

}  // namespace

TEST(Sampling, IsolatedNodeGivesEmptySet) {
  const auto adj = star(3);
  EXPECT_TRUE(sample_neighbors(adj, 2, {.k = 4, .seed = 1}).empty());
}

TEST(Sampling, KAtLeastDegreeReturnsFullNeighborhood) {
  const auto adj = star(5);
  const auto sample = sample_neighbors(adj, 0, {.k = 5, .seed = 3});
  EXPECT_EQ(sample, (std::vector<std::size_t>{1, 2, 3, 4, 5}));
  const auto larger = sample_neighbors(adj, 0, {.k = 99, .seed = 4});
  EXPECT_EQ(larger, (std::vector<std::size_t>{1, 2, 3, 4, 5}));
}

TEST(Sampling, DeterministicPerSeedNodeEpoch) {
  const auto adj = star(10);
  const SamplerConfig cfg{.k = 4, .seed = 7};
  EXPECT_EQ(sample_neighbors(adj, 0, cfg, 2), sample_neighbors(adj, 0, cfg, 2));
  EXPECT_NE(sample_neighbors(adj, 0, cfg, 2), sample_neighbors(adj, 0, cfg, 3));
}

TEST(Sampling, SampleIsSubsetWithoutReplacement) {
  const auto adj = star(8);
  for (std::uint64_t epoch = 0; epoch < 50; ++epoch) {
    const auto sample = sample_neighbors(adj, 0, {.k = 3, .seed = 11}, epoch);
    ASSERT_EQ(sample.size(), 3u);
    std::set<std::size_t> unique(sample.begin(), sample.end());
    EXPECT_EQ(unique.size(), 3u);
    for (std::size_t j : sample) {
      EXPECT_GE(j, 1u);
      EXPECT_LE(j, 8u);
    }
  }
}

// 6 neighbors, K=3: inclusion frequency of each neighbor over 10000 epochs
// must sit at 0.5 within 0.02 (uniform without replacement).
TEST(Sampling, InclusionFrequencyIsUniform) {
  const auto adj = star(6);
  std::map<std::size_t, int> counts;
  const int resamples = 10000;
  for (int epoch = 0; epoch < resamples; ++epoch) {
    for (std::size_t j :
         sample_neighbors(adj, 0, {.k = 3, .seed = 5}, static_cast<std::uint64_t>(epoch))) {
      counts[j] += 1;
    }
  }
  for (std::size_t j = 1; j <= 6; ++j) {
    EXPECT_NEAR(static_cast<double>(counts[j]) / resamples, 0.5, 0.02);
  }
}

TEST(Sampling, SampledAdjacencyWeights) {
  const auto adj = star(4);
  const auto sum = build_sampled_adjacency(adj, {.k = 2, .seed = 1}, Pooling::Sum, 0);
  for (double w : sum.weights(0)) EXPECT_DOUBLE_EQ(w, 0.5);  // 1/k

  // Mean pooling divides by the actual sample size: k larger than degree.
  const auto mean = build_sampled_adjacency(adj, {.k = 99, .seed = 1}, Pooling::Mean, 0);
  ASSERT_EQ(mean.degree(0), 4u);
  for (double w : mean.weights(0)) EXPECT_DOUBLE_EQ(w, 0.25);
}
