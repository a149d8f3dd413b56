#pragma once

#include <string>
#include <vector>

#include "ethgnn/model.hpp"
#include "ethgnn/optim.hpp"

namespace ethgnn {

struct TrainOptions {
  std::size_t epochs = 200;
  double lr = 0.01;
  OptimizerKind optimizer = OptimizerKind::Adam;
  std::uint64_t seed = 42;
};

struct TrainResult {
  GnnModel model;
  std::vector<double> losses;           // per epoch, on the train mask
  std::vector<double> test_accuracies;  // per epoch, on the test mask
  double final_test_accuracy = 0.0;
};

// Full-batch training on the masked node-classification task. Deterministic
// per seed; Sage layers resample their neighborhoods each epoch through the
// epoch counter. Aborts on a non-finite loss.
inline TrainResult train_node_classifier(const ModelSpec& spec, const SparseAdjacency& adj,
                                         const Matrix& x, const std::vector<int>& labels,
                                         const Masks& masks, const TrainOptions& opts) {
  masks.validate(adj.n_nodes());
  TrainResult result;
  result.model = GnnModel(spec, opts.seed);
  Optimizer optimizer(opts.optimizer, opts.lr);

  std::vector<LayerCache> caches;
  Matrix final_emb;
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    const Matrix logits = result.model.forward(adj, x, epoch, &caches, &final_emb);
    const MaskedLoss loss = masked_cross_entropy_with_grad(logits, labels, masks.train);
    if (!std::isfinite(loss.loss)) {
      throw std::runtime_error("training diverged: non-finite loss at epoch " +
                               std::to_string(epoch));
    }
    result.losses.push_back(loss.loss);
    result.test_accuracies.push_back(masked_accuracy(logits, labels, masks.test));

    const ModelGrads grads =
        result.model.backward(adj, caches, final_emb, loss.grad_logits);
    std::vector<double> flat = result.model.flatten_params();
    optimizer.step(flat, result.model.flatten_grads(grads));
    result.model.unflatten_params(flat);
  }
  result.final_test_accuracy =
      result.test_accuracies.empty() ? 0.0 : result.test_accuracies.back();
  return result;
}

}  // namespace ethgnn
