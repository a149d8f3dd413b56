#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ethgnn/errors.hpp"
#include "ethgnn/loss.hpp"
#include "ethgnn/mlp.hpp"
#include "ethgnn/optim.hpp"

namespace ethgnn {

struct PpoConfig {
  std::size_t hidden = 32;
  double clip_ratio = 0.2;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double lr = 3e-4;
  int epochs_per_batch = 4;

  void validate() const {
    std::vector<std::string> problems;
    if (clip_ratio <= 0.0 || clip_ratio >= 1.0) problems.push_back("clip_ratio must lie in (0,1)");
    if (hidden < 1) problems.push_back("ppo hidden size must be >= 1");
    if (epochs_per_batch < 1) problems.push_back("epochs_per_batch must be >= 1");
    if (!problems.empty()) throw ConfigError(problems);
  }
};

// Policy (state -> action logits) and value (state -> scalar) networks plus
// the Adam state that persists across update calls.
struct PpoParams {
  Mlp policy;
  Mlp value;
  PpoConfig cfg;
  Adam adam{3e-4};

  static PpoParams init(std::size_t state_dim, std::size_t n_actions, const PpoConfig& cfg,
                        std::uint64_t seed) {
    cfg.validate();
    PpoParams p;
    p.cfg = cfg;
    Rng rng(derive_seed(seed, 23));
    p.policy = Mlp::init(state_dim, cfg.hidden, n_actions, rng);
    p.value = Mlp::init(state_dim, cfg.hidden, 1, rng);
    p.adam = Adam(cfg.lr);
    return p;
  }

  std::vector<double> flatten() const {
    std::vector<double> out = policy.flatten();
    const auto v = value.flatten();
    out.insert(out.end(), v.begin(), v.end());
    return out;
  }

  void unflatten(const std::vector<double>& flat) {
    const std::size_t pos = policy.unflatten(flat, 0);
    value.unflatten(flat, pos);
  }
};

struct PpoTrajectory {
  std::vector<std::vector<double>> states;
  std::vector<int> actions;
  std::vector<double> log_probs;     // under the behavior policy
  std::vector<double> values;        // baseline estimates at collection time
  std::vector<double> rewards_norm;  // episode-normalized rewards
  std::vector<double> returns;       // discounted, filled by compute_advantages
  std::vector<double> advantages;    // standardized, filled by compute_advantages

  std::size_t size() const { return states.size(); }
};

inline int sample_action(const Mlp& policy, std::span<const double> state, Rng& rng,
                         double* log_prob = nullptr) {
  const auto logits = policy.forward(state);
  const auto probs = softmax_row(logits);
  const double r = rng.uniform();
  double cum = 0.0;
  std::size_t action = probs.size() - 1;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    cum += probs[a];
    if (r < cum) {
      action = a;
      break;
    }
  }
  if (log_prob) *log_prob = std::log(probs[action]);
  return static_cast<int>(action);
}

inline double value_estimate(const Mlp& value, std::span<const double> state) {
  return value.forward(state)[0];
}

// Discounted returns by backward recursion (episode bootstraps 0), advantage
// = return - value, then the batch is centered and, unless the spread falls
// under the 1e-8 guard, scaled to unit standard deviation.
inline void compute_advantages(PpoTrajectory& traj, double gamma) {
  if (traj.size() == 0) throw std::invalid_argument("compute_advantages: empty trajectory");
  const std::size_t n = traj.size();
  traj.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    running = traj.rewards_norm[t] + gamma * running;
    traj.returns[t] = running;
  }
  traj.advantages.assign(n, 0.0);
  double mean = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    traj.advantages[t] = traj.returns[t] - traj.values[t];
    mean += traj.advantages[t];
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double& a : traj.advantages) {
    a -= mean;
    var += a * a;
  }
  const double sd = std::sqrt(var / static_cast<double>(n));
  if (sd >= 1e-8) {
    for (double& a : traj.advantages) a /= sd;
  }
}

struct PpoUpdateStats {
  double loss = 0.0;
  double policy_loss = 0.0;  // negative clipped surrogate
  double value_loss = 0.0;   // MSE against returns
  double entropy = 0.0;      // mean policy entropy
};

// Loss and exact gradients of
//   L = -mean min(rho A, clip(rho) A) + value_coef * MSE(v, G)
//       - entropy_coef * mean entropy,
// with rho recomputed from the current parameters against the stored
// log-probabilities. Gradient layout matches PpoParams::flatten().
inline std::pair<PpoUpdateStats, std::vector<double>> ppo_loss_and_grads(
    const PpoParams& params, const PpoTrajectory& traj) {
  if (traj.size() == 0) throw std::invalid_argument("ppo loss: empty trajectory");
  if (traj.advantages.size() != traj.size() || traj.returns.size() != traj.size()) {
    throw std::invalid_argument("ppo loss: advantages not computed");
  }
  const double eps = params.cfg.clip_ratio;
  const double inv_n = 1.0 / static_cast<double>(traj.size());

  Mlp::Grads policy_grads = Mlp::Grads::zeros_like(params.policy);
  Mlp::Grads value_grads = Mlp::Grads::zeros_like(params.value);
  PpoUpdateStats stats;

  for (std::size_t t = 0; t < traj.size(); ++t) {
    const auto& state = traj.states[t];
    const int action = traj.actions[t];
    const double adv = traj.advantages[t];

    Mlp::Cache pc;
    const auto logits = params.policy.forward(state, &pc);
    const auto probs = softmax_row(logits);
    const double log_p = std::log(probs[static_cast<std::size_t>(action)]);
    const double rho = std::exp(log_p - traj.log_probs[t]);

    // Clipped surrogate and its derivative with respect to rho.
    const double unclipped = rho * adv;
    const double clipped = std::clamp(rho, 1.0 - eps, 1.0 + eps) * adv;
    double d_surrogate_d_rho;
    if (unclipped <= clipped) {
      d_surrogate_d_rho = adv;
    } else {
      d_surrogate_d_rho = (rho > 1.0 - eps && rho < 1.0 + eps) ? adv : 0.0;
    }
    stats.policy_loss += -std::min(unclipped, clipped) * inv_n;

    double entropy = 0.0;
    for (double p : probs) {
      if (p > 0.0) entropy -= p * std::log(p);
    }
    stats.entropy += entropy * inv_n;

    // d logits: surrogate term via rho * (onehot - pi), entropy term via
    // -pi_k (log pi_k + H).
    std::vector<double> d_logits(probs.size(), 0.0);
    const double d_l_d_logp = -inv_n * d_surrogate_d_rho * rho;  // loss = -surrogate
    for (std::size_t k = 0; k < probs.size(); ++k) {
      const double onehot = k == static_cast<std::size_t>(action) ? 1.0 : 0.0;
      d_logits[k] += d_l_d_logp * (onehot - probs[k]);
      if (probs[k] > 0.0) {  // p log p -> 0 as p -> 0
        d_logits[k] += params.cfg.entropy_coef * inv_n * probs[k] * (std::log(probs[k]) + entropy);
      }
    }
    params.policy.backward(pc, d_logits, policy_grads);

    Mlp::Cache vc;
    const double v = params.value.forward(state, &vc)[0];
    const double err = v - traj.returns[t];
    stats.value_loss += err * err * inv_n;
    const double d_v = params.cfg.value_coef * 2.0 * err * inv_n;
    const double d_v_arr[1] = {d_v};
    params.value.backward(vc, d_v_arr, value_grads);
  }

  stats.loss = stats.policy_loss + params.cfg.value_coef * stats.value_loss -
               params.cfg.entropy_coef * stats.entropy;
  if (!std::isfinite(stats.loss)) throw std::runtime_error("ppo loss: non-finite loss");

  std::vector<double> grads = Mlp::flatten_grads(policy_grads);
  const auto vg = Mlp::flatten_grads(value_grads);
  grads.insert(grads.end(), vg.begin(), vg.end());
  return {stats, std::move(grads)};
}

// One optimizer step per call; the Adam state inside PpoParams persists
// across calls. A differing lr re-scales the gradient instead of resetting
// the moments.
inline PpoUpdateStats ppo_update(PpoParams& params, const PpoTrajectory& traj, double lr) {
  auto [stats, grads] = ppo_loss_and_grads(params, traj);
  if (lr != params.cfg.lr && params.cfg.lr > 0.0) {
    const double scale = lr / params.cfg.lr;
    for (double& g : grads) g *= scale;
  }
  std::vector<double> flat = params.flatten();
  params.adam.step(flat, grads);
  params.unflatten(flat);
  return stats;
}

}  // namespace ethgnn
