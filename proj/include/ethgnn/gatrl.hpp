#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ethgnn/model.hpp"
#include "ethgnn/optim.hpp"
#include "ethgnn/ppo.hpp"
#include "ethgnn/train.hpp"

namespace ethgnn {

struct GatrlConfig {
  std::size_t horizon = 16;                    // env steps per episode
  std::vector<double> factors{0.5, 1.0, 2.0};  // per-action column scale
  double alloc_min = 0.5;                      // cumulative allocation bounds
  double alloc_max = 2.0;
  double gamma = 0.99;
  PpoConfig ppo;
  double gat_lr = 0.01;
  OptimizerKind gat_optimizer = OptimizerKind::Adam;

  void validate() const {
    std::vector<std::string> problems;
    if (horizon == 0) problems.push_back("horizon must be >= 1");
    if (factors.empty()) problems.push_back("factors must be non-empty");
    if (alloc_min <= 0.0 || alloc_min > alloc_max) {
      problems.push_back("allocation bounds must satisfy 0 < alloc_min <= alloc_max");
    }
    if (gamma < 0.0 || gamma >= 1.0) problems.push_back("gamma must lie in [0,1)");
    if (!problems.empty()) throw ConfigError(problems);
  }
};

// Resource-allocation environment over node features: the action picks one
// feature column and one scale factor; the cumulative per-column allocation
// stays inside [alloc_min, alloc_max] and is applied to a copy, never to the
// base matrix. The observation is the allocation vector itself.
class ResourceAllocationEnv {
 public:
  ResourceAllocationEnv(const Matrix& base_features, std::vector<int> labels, Masks masks,
                        const GatrlConfig& cfg)
      : base_(&base_features),
        labels_(std::move(labels)),
        masks_(std::move(masks)),
        cfg_(&cfg),
        allocation_(base_features.cols(), 1.0) {}

  int n_actions() const {
    return static_cast<int>(base_->cols() * cfg_->factors.size());
  }

  std::size_t steps_taken() const { return steps_; }
  bool done() const { return steps_ >= cfg_->horizon; }
  const std::vector<double>& allocation() const { return allocation_; }
  const Matrix& base_features() const { return *base_; }
  const std::vector<int>& labels() const { return labels_; }
  const Masks& masks() const { return masks_; }

  std::vector<double> observation() const { return allocation_; }

  // Applies the action to the allocation and returns the scaled copy of the
  // base features. The base matrix is never touched.
  Matrix apply_resource_allocation(int action) {
    if (action < 0 || action >= n_actions()) {
      throw std::invalid_argument("apply_resource_allocation: action out of range");
    }
    const std::size_t column = static_cast<std::size_t>(action) / cfg_->factors.size();
    const double factor = cfg_->factors[static_cast<std::size_t>(action) % cfg_->factors.size()];
    allocation_[column] =
        std::clamp(allocation_[column] * factor, cfg_->alloc_min, cfg_->alloc_max);
    ++steps_;
    return features();
  }

  Matrix features() const {
    Matrix out = *base_;
    for (std::size_t i = 0; i < out.rows(); ++i) {
      auto row = out.row(i);
      for (std::size_t j = 0; j < out.cols(); ++j) row[j] *= allocation_[j];
    }
    return out;
  }

  // Running z-score over this episode's raw rewards (Welford, population
  // standard deviation, 1e-8 guard). The first reward is 0 by construction.
  double normalize_reward(double raw) {
    ++reward_count_;
    const double delta = raw - reward_mean_;
    reward_mean_ += delta / static_cast<double>(reward_count_);
    reward_m2_ += delta * (raw - reward_mean_);
    const double sd = std::sqrt(reward_m2_ / static_cast<double>(reward_count_));
    if (sd < 1e-8) return 0.0;
    return (raw - reward_mean_) / sd;
  }

  const std::vector<double>& raw_rewards() const { return raw_rewards_; }
  void record_raw_reward(double raw) { raw_rewards_.push_back(raw); }

 private:
  const Matrix* base_;
  std::vector<int> labels_;
  Masks masks_;
  const GatrlConfig* cfg_;
  std::vector<double> allocation_;
  std::size_t steps_ = 0;

  std::size_t reward_count_ = 0;
  double reward_mean_ = 0.0;
  double reward_m2_ = 0.0;
  std::vector<double> raw_rewards_;
};

// Raw reward = -(masked training loss of the GAT on the modified features);
// the environment converts it to the episode's running z-score.
inline double calculate_reward(ResourceAllocationEnv& env, const GnnModel& gat,
                               const SparseAdjacency& adj, const Matrix& modified_features) {
  const Matrix logits = gat.forward(adj, modified_features);
  const double loss = masked_cross_entropy(logits, env.labels(), env.masks().train);
  if (!std::isfinite(loss)) throw std::runtime_error("calculate_reward: non-finite GAT loss");
  const double raw = -loss;
  env.record_raw_reward(raw);
  return env.normalize_reward(raw);
}

struct CombinedTrace {
  std::vector<double> gat_loss;
  std::vector<double> ppo_loss;
};

struct CombinedResult {
  GnnModel gat;
  PpoParams ppo;
  CombinedTrace trace;
  std::vector<PpoUpdateStats> ppo_stats;  // empty entries when PPO is off
  double final_test_accuracy = 0.0;
};

namespace detail {

// One full-batch GAT step; shared by the plain baseline and the combined
// loop so the PPO-disabled ablation reproduces plain training bit-exactly.
inline double gat_step(GnnModel& model, Optimizer& opt, const SparseAdjacency& adj,
                       const Matrix& x, const std::vector<int>& labels, const Masks& masks,
                       std::size_t epoch) {
  std::vector<LayerCache> caches;
  Matrix final_emb;
  const Matrix logits = model.forward(adj, x, epoch, &caches, &final_emb);
  const MaskedLoss loss = masked_cross_entropy_with_grad(logits, labels, masks.train);
  if (!std::isfinite(loss.loss)) {
    throw std::runtime_error("combined training diverged at epoch " + std::to_string(epoch));
  }
  const ModelGrads grads = model.backward(adj, caches, final_emb, loss.grad_logits);
  std::vector<double> flat = model.flatten_params();
  opt.step(flat, model.flatten_grads(grads));
  model.unflatten_params(flat);
  return loss.loss;
}

}  // namespace detail

// The combined loop: per epoch one GAT training pass, then one PPO episode
// on a freshly constructed environment, then one PPO update. The episode's
// final allocation scales the features the next GAT pass trains on, which is
// how the agent's interventions feed back into propagation quality. With
// ppo_enabled = false the allocation stays at 1 and the loop is exactly
// plain GAT training.
inline CombinedResult train_combined(const SparseAdjacency& adj, const Matrix& x,
                                     const std::vector<int>& labels, const Masks& masks,
                                     const ModelSpec& gat_spec, const GatrlConfig& cfg,
                                     std::size_t num_epochs, std::uint64_t seed,
                                     bool ppo_enabled = true) {
  cfg.validate();
  masks.validate(adj.n_nodes());

  CombinedResult result;
  result.gat = GnnModel(gat_spec, seed);
  Optimizer gat_opt(cfg.gat_optimizer, cfg.gat_lr);

  const std::size_t n_actions = x.cols() * cfg.factors.size();
  result.ppo = PpoParams::init(x.cols(), n_actions, cfg.ppo, derive_seed(seed, 2));
  Rng action_rng(derive_seed(seed, 3));

  std::vector<double> allocation(x.cols(), 1.0);
  for (std::size_t epoch = 0; epoch < num_epochs; ++epoch) {
    // GAT pass on the features shaped by the previous episode's allocation.
    Matrix shaped = x;
    for (std::size_t i = 0; i < shaped.rows(); ++i) {
      auto row = shaped.row(i);
      for (std::size_t j = 0; j < shaped.cols(); ++j) row[j] *= allocation[j];
    }
    result.trace.gat_loss.push_back(
        detail::gat_step(result.gat, gat_opt, adj, shaped, labels, masks, epoch));

    if (!ppo_enabled) {
      result.trace.ppo_loss.push_back(0.0);
      continue;
    }

    ResourceAllocationEnv env(x, labels, masks, cfg);
    PpoTrajectory traj;
    while (!env.done()) {
      const std::vector<double> state = env.observation();
      double log_p = 0.0;
      const int action = sample_action(result.ppo.policy, state, action_rng, &log_p);
      const Matrix modified = env.apply_resource_allocation(action);
      calculate_reward(env, result.gat, adj, modified);  // records the raw reward

      traj.states.push_back(state);
      traj.actions.push_back(action);
      traj.log_probs.push_back(log_p);
      traj.values.push_back(value_estimate(result.ppo.value, state));
    }
    // Rewards enter the PPO batch normalized over the whole episode.
    const auto& raw = env.raw_rewards();
    double mean = 0.0;
    for (double r : raw) mean += r;
    mean /= static_cast<double>(raw.size());
    double var = 0.0;
    for (double r : raw) var += (r - mean) * (r - mean);
    const double sd = std::sqrt(var / static_cast<double>(raw.size()));
    traj.rewards_norm.resize(raw.size());
    for (std::size_t t = 0; t < raw.size(); ++t) {
      traj.rewards_norm[t] = sd < 1e-8 ? 0.0 : (raw[t] - mean) / sd;
    }

    compute_advantages(traj, cfg.gamma);
    const PpoUpdateStats stats = ppo_update(result.ppo, traj, cfg.ppo.lr);
    result.trace.ppo_loss.push_back(stats.loss);
    result.ppo_stats.push_back(stats);
    allocation = env.allocation();
  }

  if (num_epochs > 0) {
    const Matrix logits = result.gat.forward(adj, x);
    result.final_test_accuracy = masked_accuracy(logits, labels, masks.test);
  }
  return result;
}

struct ComparisonResult {
  CombinedResult plain;     // PPO branch disabled
  CombinedResult combined;  // full GAT-RL loop
};

// Trains plain GAT and combined GAT-RL under the same seed and budget.
inline ComparisonResult compare_gat_vs_gatrl(const SparseAdjacency& adj, const Matrix& x,
                                             const std::vector<int>& labels, const Masks& masks,
                                             const ModelSpec& gat_spec, const GatrlConfig& cfg,
                                             std::size_t epochs, std::uint64_t seed) {
  ComparisonResult result;
  result.plain = train_combined(adj, x, labels, masks, gat_spec, cfg, epochs, seed, false);
  result.combined = train_combined(adj, x, labels, masks, gat_spec, cfg, epochs, seed, true);
  return result;
}

// Moving average with the given window; used for the loss-direction checks.
inline std::vector<double> smoothed(const std::vector<double>& xs, std::size_t window) {
  std::vector<double> out(xs.size(), 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t k = lo; k <= i; ++k) sum += xs[k];
    out[i] = sum / static_cast<double>(i - lo + 1);
  }
  return out;
}

}  // namespace ethgnn
