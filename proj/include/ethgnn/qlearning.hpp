#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "ethgnn/errors.hpp"
#include "ethgnn/rng.hpp"

namespace ethgnn {

struct RlHyper {
  double alpha = 0.1;          // learning rate, (0, 1]
  double gamma = 0.9;          // discount, [0, 1)
  double epsilon = 1.0;        // exploration probability, [0, 1]
  double epsilon_decay = 0.99; // multiplicative per episode
  double epsilon_floor = 0.05;

  void validate() const {
    std::vector<std::string> problems;
    if (alpha <= 0.0 || alpha > 1.0) problems.push_back("alpha must lie in (0,1]");
    if (gamma < 0.0 || gamma >= 1.0) problems.push_back("gamma must lie in [0,1)");
    if (epsilon < 0.0 || epsilon > 1.0) problems.push_back("epsilon must lie in [0,1]");
    if (epsilon_decay <= 0.0 || epsilon_decay > 1.0) {
      problems.push_back("epsilon_decay must lie in (0,1]");
    }
    if (epsilon_floor < 0.0 || epsilon_floor > epsilon) {
      problems.push_back("epsilon_floor must lie in [0, epsilon]");
    }
    if (!problems.empty()) throw ConfigError(problems);
  }
};

// Sparse tabular Q: absent entries read as 0.
class QTable {
 public:
  double get(int state, int action) const {
    const auto it = q_.find(key(state, action));
    return it == q_.end() ? 0.0 : it->second;
  }

  void set(int state, int action, double value) { q_[key(state, action)] = value; }

  double max_over(int state, int n_actions) const {
    double best = get(state, 0);
    for (int a = 1; a < n_actions; ++a) best = std::max(best, get(state, a));
    return best;
  }

  // Ties break toward the lowest action id, so runs are reproducible.
  int argmax(int state, const std::vector<int>& actions) const {
    int best = actions.front();
    double best_q = get(state, best);
    for (std::size_t k = 1; k < actions.size(); ++k) {
      const double q = get(state, actions[k]);
      if (q > best_q) {
        best_q = q;
        best = actions[k];
      }
    }
    return best;
  }

  std::size_t entries() const { return q_.size(); }

 private:
  static std::uint64_t key(int state, int action) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(state)) << 32) |
           static_cast<std::uint32_t>(action);
  }

  std::unordered_map<std::uint64_t, double> q_;
};

struct Transition {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int next_state = 0;
  bool terminal = false;
  int n_actions = 1;  // actions available in next_state
};

// Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)); terminal
// transitions bootstrap 0. Touches exactly one entry.
inline void q_update(QTable& q, const Transition& t, const RlHyper& hp) {
  if (!std::isfinite(t.reward)) throw std::invalid_argument("non-finite reward");
  const double next = t.terminal ? 0.0 : q.max_over(t.next_state, t.n_actions);
  const double delta = hp.alpha * (t.reward + hp.gamma * next - q.get(t.state, t.action));
  q.set(t.state, t.action, q.get(t.state, t.action) + delta);
}

// With probability epsilon a uniform action, otherwise the argmax.
inline int epsilon_greedy(const QTable& q, int state, const std::vector<int>& actions,
                          double epsilon, Rng& rng) {
  if (actions.empty()) throw std::invalid_argument("epsilon_greedy: empty action set");
  if (rng.uniform() < epsilon) {
    return actions[rng.below(actions.size())];
  }
  return q.argmax(state, actions);
}

struct StepResult {
  int next_state = 0;
  double reward = 0.0;
  bool done = false;
};

template <class E>
concept DiscreteEnv = requires(E e, int a, Rng& rng) {
  { e.n_actions() } -> std::convertible_to<int>;
  { e.reset(rng) } -> std::convertible_to<int>;
  { e.step(a, rng) } -> std::same_as<StepResult>;
};

struct QTrainResult {
  QTable table;
  std::vector<double> episode_returns;   // undiscounted reward sums
  std::vector<double> episode_epsilons;  // epsilon in force during the episode
};

// Episodic epsilon-greedy control; epsilon decays multiplicatively to its
// floor after each episode. Deterministic per seed.
template <DiscreteEnv E>
QTrainResult train_q_agent(E& env, const RlHyper& hp, std::size_t episodes, std::uint64_t seed,
                           std::size_t max_steps_per_episode = 1000) {
  hp.validate();
  QTrainResult result;
  Rng rng(derive_seed(seed, 55));
  std::vector<int> actions(static_cast<std::size_t>(env.n_actions()));
  for (std::size_t a = 0; a < actions.size(); ++a) actions[a] = static_cast<int>(a);

  double epsilon = hp.epsilon;
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    int state = env.reset(rng);
    double ret = 0.0;
    for (std::size_t step = 0; step < max_steps_per_episode; ++step) {
      const int action = epsilon_greedy(result.table, state, actions, epsilon, rng);
      const StepResult sr = env.step(action, rng);
      if (!std::isfinite(sr.reward)) {
        throw std::runtime_error("environment returned non-finite reward");
      }
      q_update(result.table,
               {state, action, sr.reward, sr.next_state, sr.done, env.n_actions()}, hp);
      ret += sr.reward;
      state = sr.next_state;
      if (sr.done) break;
    }
    result.episode_returns.push_back(ret);
    result.episode_epsilons.push_back(epsilon);
    epsilon = std::max(hp.epsilon_floor, epsilon * hp.epsilon_decay);
  }
  return result;
}

}  // namespace ethgnn
