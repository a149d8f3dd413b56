#include <gtest/gtest.h>

#include "ethgnn/model.hpp"
#include "ethgnn/rng.hpp"

using namespace ethgnn;

namespace {

SparseAdjacency random_graph(Rng& rng, std::size_t n, std::size_t n_edges) {
  std::vector<Coo> entries;
  for (std::size_t e = 0; e < n_edges; ++e) {
    entries.push_back({static_cast<std::size_t>(rng.below(n)),
                       static_cast<std::size_t>(rng.below(n)), 1.0});
  }
  return SparseAdjacency::from_coo(n, std::move(entries));
}

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

struct Problem {
  GnnModel model;
  SparseAdjacency adj;
  Matrix x;
  std::vector<int> labels;
  std::vector<bool> mask;
  std::uint64_t epoch = 0;
};

double loss_of(Problem& p, const std::vector<double>& flat) {
  p.model.unflatten_params(flat);
  const Matrix logits = p.model.forward(p.adj, p.x, p.epoch);
  return masked_cross_entropy(logits, p.labels, p.mask);
}

std::vector<double> analytic_grad(Problem& p, const std::vector<double>& flat) {
  p.model.unflatten_params(flat);
  std::vector<LayerCache> caches;
  Matrix final_emb;
  const Matrix logits = p.model.forward(p.adj, p.x, p.epoch, &caches, &final_emb);
  const MaskedLoss loss = masked_cross_entropy_with_grad(logits, p.labels, p.mask);
  return p.model.flatten_grads(p.model.backward(p.adj, caches, final_emb, loss.grad_logits));
}

// Central differences with step 1e-5; relative error below 1e-4 on every
// parameter of the model.
void check_gradients(Problem& p, double step = 1e-5, double tol = 1e-4) {
  std::vector<double> flat = p.model.flatten_params();
  const std::vector<double> analytic = analytic_grad(p, flat);
  ASSERT_EQ(analytic.size(), flat.size());

  double worst = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double save = flat[i];
    flat[i] = save + step;
    const double up = loss_of(p, flat);
    flat[i] = save - step;
    const double down = loss_of(p, flat);
    flat[i] = save;
    const double fd = (up - down) / (2.0 * step);
    const double rel =
        std::abs(analytic[i] - fd) / std::max({std::abs(analytic[i]), std::abs(fd), 1e-6});
    worst = std::max(worst, rel);
    EXPECT_LT(rel, tol) << "param " << i << " analytic " << analytic[i] << " fd " << fd;
  }
  loss_of(p, flat);  // restore parameters
  SUCCEED() << "worst relative error " << worst;
}

Problem make_problem(LayerKind kind, std::uint64_t seed, std::size_t n = 6,
                     Act act = Act::Sigmoid) {
  Rng rng(seed);
  Problem p;
  p.adj = random_graph(rng, n, 3 * n);
  p.x = random_matrix(rng, n, 3);
  p.labels.resize(n);
  p.mask.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    p.labels[i] = static_cast<int>(rng.below(2));
    p.mask[i] = rng.uniform() < 0.7;
  }
  p.mask[0] = true;  // never empty

  ModelSpec spec;
  LayerConfig l1{.kind = kind, .d_in = 3, .d_out = 4, .act = {act, 0.1}};
  LayerConfig l2{.kind = kind, .d_in = 4, .d_out = 4, .act = {act, 0.1}};
  l1.sampler = {.k = 2, .seed = 9};
  l2.sampler = {.k = 2, .seed = 10};
  spec.layers = {l1, l2};
  spec.n_classes = 2;
  p.model = GnnModel(spec, seed);
  return p;
}

}  // namespace

TEST(GradCheck, TwoLayerGraphConv) {
  auto p = make_problem(LayerKind::GraphConv, 301);
  check_gradients(p);
}

TEST(GradCheck, TwoLayerSage) {
  auto p = make_problem(LayerKind::Sage, 302);
  check_gradients(p);
}

// Every parameter of a 2-layer GAT on a 6-node graph, including the attention
// vector through the softmax.
TEST(GradCheck, TwoLayerGat) {
  auto p = make_problem(LayerKind::Gat, 303);
  check_gradients(p);
}

TEST(GradCheck, TwoLayerGatRl) {
  auto p = make_problem(LayerKind::GatRl, 304);
  check_gradients(p);
}

TEST(GradCheck, MixedStackWithRelu) {
  Rng rng(305);
  Problem p;
  p.adj = random_graph(rng, 7, 18);
  p.x = random_matrix(rng, 7, 4);
  p.labels = {0, 1, 1, 0, 1, 0, 1};
  p.mask = {true, true, false, true, true, false, true};
  ModelSpec spec;
  spec.layers = {
      LayerConfig{.kind = LayerKind::Gat, .d_in = 4, .d_out = 5, .act = {Act::LeakyReLU, 0.3}},
      LayerConfig{.kind = LayerKind::GatRl, .d_in = 5, .d_out = 5, .act = {Act::Sigmoid}},
      LayerConfig{.kind = LayerKind::GraphConv, .d_in = 5, .d_out = 3, .act = {Act::Identity}},
  };
  spec.n_classes = 3;
  for (auto& n : p.labels) n = static_cast<int>(rng.below(3));
  p.model = GnnModel(spec, 305);
  check_gradients(p);
}

// Zero upstream gradient must produce exactly zero gradients everywhere.
TEST(GradCheck, ZeroUpstreamGradientGivesZeroGradients) {
  auto p = make_problem(LayerKind::Gat, 306);
  std::vector<LayerCache> caches;
  Matrix final_emb;
  const Matrix logits = p.model.forward(p.adj, p.x, 0, &caches, &final_emb);
  const Matrix zero_grad(logits.rows(), logits.cols());
  const auto grads = p.model.backward(p.adj, caches, final_emb, zero_grad);
  for (double g : p.model.flatten_grads(grads)) {
    EXPECT_EQ(g, 0.0);
  }
}

// Linear map with a quadratic loss: gradients equal the closed form
// dW = Xᵀ(Y - T), db = colsum(Y - T).
TEST(GradCheck, LinearModelQuadraticLossClosedForm) {
  Rng rng(307);
  const std::size_t n = 5, d_in = 3, d_out = 2;
  const auto adj = SparseAdjacency::identity(n);
  const Matrix x = random_matrix(rng, n, d_in);
  const Matrix target = random_matrix(rng, n, d_out);

  LayerParams params;
  params.w = random_matrix(rng, d_in, d_out);
  params.b.resize(d_out);
  for (double& v : params.b) v = rng.normal();

  LayerCache cache;
  const Matrix y =
      graphconv_forward(params, adj, x, {Act::Identity}, &cache);  // y = xW + b

  // L = 0.5 * sum (y - t)^2  =>  dL/dy = y - t
  Matrix d_y(n, d_out);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d_out; ++j) d_y(i, j) = y(i, j) - target(i, j);
  }
  LayerConfig cfg{.kind = LayerKind::GraphConv, .d_in = d_in, .d_out = d_out,
                  .act = {Act::Identity}};
  LayerGrads grads;
  layer_backward(cfg, params, adj, cache, d_y, grads);

  const Matrix expected_dw = matmul(transpose(x), d_y);
  EXPECT_LT(max_abs_diff(grads.w, expected_dw), 1e-12);
  for (std::size_t j = 0; j < d_out; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < n; ++i) col += d_y(i, j);
    EXPECT_NEAR(grads.b[j], col, 1e-12);
  }
}

TEST(Loss, UniformLogitsGiveLogC) {
  for (std::size_t c : {2, 3, 7}) {
    const Matrix logits(4, c, 0.3);
    const std::vector<int> labels(4, 1);
    const std::vector<bool> mask(4, true);
    EXPECT_NEAR(masked_cross_entropy(logits, labels, mask), std::log(double(c)), 1e-12);
  }
}

TEST(Loss, LargeMarginDrivesLossToZero) {
  Matrix logits(2, 2);
  logits(0, 0) = 20.0;  // margin 20 on the correct class
  logits(1, 1) = 20.0;
  const std::vector<int> labels{0, 1};
  const std::vector<bool> mask{true, true};
  EXPECT_LT(masked_cross_entropy(logits, labels, mask), 1e-3);
}

// Three nodes with hand-set logits; expected value written out from the
// definition -mean(log softmax[label]).
TEST(Loss, HandComputedThreeNodeCase) {
  const Matrix logits = Matrix::from_rows({{1.0, 2.0}, {0.0, 0.5}, {3.0, -1.0}});
  const std::vector<int> labels{1, 0, 0};
  const std::vector<bool> mask{true, false, true};
  const double l0 = -std::log(std::exp(2.0) / (std::exp(1.0) + std::exp(2.0)));
  const double l2 = -std::log(std::exp(3.0) / (std::exp(3.0) + std::exp(-1.0)));
  EXPECT_NEAR(masked_cross_entropy(logits, labels, mask), (l0 + l2) / 2.0, 1e-12);
}

TEST(Loss, EmptyMaskThrows) {
  EXPECT_THROW(
      masked_cross_entropy(Matrix(3, 2), std::vector<int>(3, 0), std::vector<bool>(3, false)),
      std::invalid_argument);
}

TEST(Loss, GradMatchesFiniteDifferences) {
  Rng rng(308);
  Matrix logits = random_matrix(rng, 5, 3);
  std::vector<int> labels{0, 2, 1, 1, 0};
  std::vector<bool> mask{true, true, false, true, true};
  const MaskedLoss ml = masked_cross_entropy_with_grad(logits, labels, mask);
  const double step = 1e-6;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    for (std::size_t j = 0; j < logits.cols(); ++j) {
      Matrix up = logits, down = logits;
      up(i, j) += step;
      down(i, j) -= step;
      const double fd = (masked_cross_entropy(up, labels, mask) -
                         masked_cross_entropy(down, labels, mask)) /
                        (2 * step);
      EXPECT_NEAR(ml.grad_logits(i, j), fd, 1e-8);
    }
  }
}
