#include <gtest/gtest.h>

#include "ethgnn/train.hpp"

using namespace ethgnn;

namespace {

// Two 10-node clusters with ring adjacency inside each cluster and cleanly
// separated features; labels = cluster id.
struct Separable {
  SparseAdjacency adj;
  Matrix x;
  std::vector<int> labels;
  Masks masks;
};

Separable make_separable() {
  const std::size_t per = 10, n = 2 * per;
  std::vector<Coo> entries;
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t k = 0; k < per; ++k) {
      const std::size_t i = c * per + k;
      const std::size_t j = c * per + (k + 1) % per;
      entries.push_back({i, j, 1.0});
      entries.push_back({j, i, 1.0});
    }
  }
  Separable s;
  s.adj = SparseAdjacency::from_coo(n, std::move(entries));
  s.x = Matrix(n, 2);
  s.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool second = i >= per;
    s.labels[i] = second ? 1 : 0;
    s.x(i, 0) = second ? -2.0 - 0.01 * static_cast<double>(i) : 2.0 + 0.01 * static_cast<double>(i);
    s.x(i, 1) = second ? 0.5 : -0.5;
  }
  s.masks = random_split(n, 0.7, 9);
  return s;
}

ModelSpec one_layer_spec() {
  ModelSpec spec;
  spec.layers = {LayerConfig{.kind = LayerKind::GraphConv, .d_in = 2, .d_out = 4,
                             .act = {Act::ReLU}}};
  spec.n_classes = 2;
  return spec;
}

}  // namespace

TEST(Train, SeparableDataReachesFullAccuracyWithin200Epochs) {
  const Separable s = make_separable();
  TrainOptions opts;
  opts.epochs = 200;
  opts.lr = 0.05;
  opts.seed = 1;
  const TrainResult r =
      train_node_classifier(one_layer_spec(), s.adj, s.x, s.labels, s.masks, opts);
  EXPECT_DOUBLE_EQ(r.final_test_accuracy, 1.0);
  EXPECT_LT(r.losses.back(), r.losses.front());
}

TEST(Train, ZeroLearningRateFreezesEverything) {
  const Separable s = make_separable();
  TrainOptions opts;
  opts.epochs = 10;
  opts.lr = 0.0;
  opts.optimizer = OptimizerKind::Sgd;
  const TrainResult r =
      train_node_classifier(one_layer_spec(), s.adj, s.x, s.labels, s.masks, opts);
  for (double l : r.losses) EXPECT_DOUBLE_EQ(l, r.losses.front());

  const GnnModel fresh(one_layer_spec(), opts.seed);
  EXPECT_EQ(r.model.flatten_params(), fresh.flatten_params());
}

TEST(Train, SameSeedGivesIdenticalLossCurves) {
  const Separable s = make_separable();
  TrainOptions opts;
  opts.epochs = 40;
  opts.seed = 7;
  const TrainResult a =
      train_node_classifier(one_layer_spec(), s.adj, s.x, s.labels, s.masks, opts);
  const TrainResult b =
      train_node_classifier(one_layer_spec(), s.adj, s.x, s.labels, s.masks, opts);
  EXPECT_EQ(a.losses, b.losses);
  EXPECT_EQ(a.model.flatten_params(), b.model.flatten_params());
}

TEST(Train, SageLayerTrainsDeterministically) {
  const Separable s = make_separable();
  ModelSpec spec;
  spec.layers = {LayerConfig{.kind = LayerKind::Sage, .d_in = 2, .d_out = 4,
                             .act = {Act::ReLU}, .sampler = {.k = 2, .seed = 3}}};
  TrainOptions opts;
  opts.epochs = 30;
  const TrainResult a = train_node_classifier(spec, s.adj, s.x, s.labels, s.masks, opts);
  const TrainResult b = train_node_classifier(spec, s.adj, s.x, s.labels, s.masks, opts);
  EXPECT_EQ(a.losses, b.losses);
}

TEST(Train, DivergenceAbortsWithEpochIndex) {
  const Separable s = make_separable();
  TrainOptions opts;
  opts.epochs = 400;
  opts.lr = 1e12;
  opts.optimizer = OptimizerKind::Sgd;
  try {
    train_node_classifier(one_layer_spec(), s.adj, s.x, s.labels, s.masks, opts);
    FAIL() << "expected divergence";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Train, OverlappingMasksRejected) {
  const Separable s = make_separable();
  Masks bad = s.masks;
  bad.train[0] = bad.test[0] = true;
  EXPECT_THROW(
      train_node_classifier(one_layer_spec(), s.adj, s.x, s.labels, bad, TrainOptions{}),
      ConfigError);
}

TEST(Checkpoint, JsonRoundTripPreservesForwardExactly) {
  const Separable s = make_separable();
  ModelSpec spec;
  spec.layers = {
      LayerConfig{.kind = LayerKind::Gat, .d_in = 2, .d_out = 5, .act = {Act::LeakyReLU, 0.05},
                  .attn_slope = 0.2},
      LayerConfig{.kind = LayerKind::GatRl, .d_in = 5, .d_out = 5, .act = {Act::Sigmoid}},
  };
  TrainOptions opts;
  opts.epochs = 15;
  const TrainResult r = train_node_classifier(spec, s.adj, s.x, s.labels, s.masks, opts);

  const std::string dumped = r.model.to_json().dump();
  const GnnModel restored = GnnModel::from_json(nlohmann::json::parse(dumped));
  EXPECT_EQ(restored.flatten_params(), r.model.flatten_params());
  EXPECT_EQ(restored.forward(s.adj, s.x), r.model.forward(s.adj, s.x));
}

TEST(Masks, RandomSplitCoversAllNodesDisjointly) {
  const Masks m = random_split(50, 0.7, 3);
  m.validate(50);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_NE(m.train[i], m.test[i]);  // exactly one side
  }
}
