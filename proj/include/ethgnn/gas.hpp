#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ethgnn/errors.hpp"
#include "ethgnn/qlearning.hpp"
#include "ethgnn/rng.hpp"

namespace ethgnn {

// Transactions processed per block under the fixed-rate model: min(N, G/T).
// Real-valued by definition; the simulator separately uses integer inclusion
// counts.
inline double throughput(double n_txs, double gas_limit, double t_per_tx) {
  if (t_per_tx <= 0.0) throw std::invalid_argument("throughput: t_per_tx must be positive");
  return std::min(n_txs, gas_limit / t_per_tx);
}

// Least G with G/T >= N, i.e. G = N*T: the throughput saturation boundary.
// The RL experiment is scored against this closed form. The rounded product
// can land an ulp short of the boundary, so G is nudged up until G/T >= N
// holds exactly in doubles.
inline double optimal_gas_closed_form(double n_txs, double t_per_tx) {
  if (t_per_tx <= 0.0) throw std::invalid_argument("optimal_gas: t_per_tx must be positive");
  if (n_txs < 0.0) throw std::invalid_argument("optimal_gas: n_txs must be non-negative");
  double gas = n_txs * t_per_tx;
  while (gas / t_per_tx < n_txs) {
    gas = std::nextafter(gas, std::numeric_limits<double>::infinity());
  }
  return gas;
}

struct GasModel {
  std::uint64_t n_pending = 8;    // N, transactions awaiting inclusion
  double t_per_tx = 0.1;          // T, seconds per transaction
  std::uint64_t g_limit = 21000;  // G, block gas limit
  std::uint64_t g_per_tx = 21000; // gas consumed per transaction

  void validate() const {
    std::vector<std::string> problems;
    if (t_per_tx <= 0.0) problems.push_back("t_per_tx must be positive");
    if (g_per_tx == 0) problems.push_back("g_per_tx must be positive");
    if (!problems.empty()) throw ConfigError(problems);
  }
};

enum class CongestionMode {
  ExcludedFraction,  // fraction of pending transactions left out
  FeeTiered,         // fraction of above-median-fee transactions left out
};

struct StepOutcome {
  std::uint64_t txs_included = 0;
  double block_processing_time = 0.0;
  double congestion = 0.0;
  double reward = 0.0;  // always the exact negation of the processing time
};

// Deterministic single-block model shared by Algorithm 1 and the RL
// environment: include up to floor(G / g_per_tx) of the pending
// transactions, time = overhead + T*included + penalty*congestion.
inline StepOutcome simulate_block(std::uint64_t n_pending, std::uint64_t gas_limit,
                                  const GasModel& model, double overhead,
                                  double congestion_penalty) {
  const std::uint64_t capacity = gas_limit / model.g_per_tx;
  StepOutcome out;
  out.txs_included = std::min(n_pending, capacity);
  out.congestion =
      n_pending == 0
          ? 0.0
          : 1.0 - static_cast<double>(out.txs_included) / static_cast<double>(n_pending);
  out.block_processing_time = overhead +
                              model.t_per_tx * static_cast<double>(out.txs_included) +
                              congestion_penalty * out.congestion;
  out.reward = -out.block_processing_time;
  return out;
}

// Environment configuration: block model, gas-limit action grid, arrival
// process and the tabular state grids.
struct GasSimConfig {
  GasModel model;
  double overhead = 0.0;
  double congestion_penalty = 1.0;  // default 10 * t_per_tx
  CongestionMode congestion_mode = CongestionMode::ExcludedFraction;

  std::uint64_t gas_limit_increment = 21000;
  std::uint64_t max_gas_limit = 336000;
  std::uint64_t initial_gas_limit = 21000;

  std::uint64_t mean_pending = 8;     // arrivals: uniform on mean +- jitter
  std::uint64_t pending_jitter = 0;

  std::size_t pending_buckets = 8;
  std::size_t congestion_buckets = 4;
  std::size_t gas_buckets = 16;

  void validate() const {
    model.validate();
    std::vector<std::string> problems;
    if (gas_limit_increment == 0) problems.push_back("gas_limit_increment must be positive");
    if (initial_gas_limit == 0 || initial_gas_limit > max_gas_limit) {
      problems.push_back("initial_gas_limit must lie in (0, max_gas_limit]");
    }
    if (pending_buckets == 0 || congestion_buckets == 0 || gas_buckets == 0) {
      problems.push_back("state grids need at least one bucket each");
    }
    if (!problems.empty()) throw ConfigError(problems);
  }

  static GasSimConfig defaults() {
    GasSimConfig cfg;
    cfg.congestion_penalty = 10.0 * cfg.model.t_per_tx;
    return cfg;
  }
};

// Continuous environment state plus its discretized id.
struct GasEnvState {
  std::uint64_t pending = 0;
  std::uint64_t gas_limit = 0;
  double congestion = 0.0;  // from the previous block

  int encode(const GasSimConfig& cfg) const {
    const std::uint64_t pending_cap = cfg.mean_pending + cfg.pending_jitter;
    const std::size_t pb = std::min<std::size_t>(
        cfg.pending_buckets - 1,
        static_cast<std::size_t>(pending * cfg.pending_buckets / (pending_cap + 1)));
    const std::size_t cb = std::min<std::size_t>(
        cfg.congestion_buckets - 1,
        static_cast<std::size_t>(congestion * static_cast<double>(cfg.congestion_buckets)));
    const std::uint64_t lo = cfg.gas_limit_increment;
    const std::uint64_t span = cfg.max_gas_limit - lo + 1;
    const std::size_t gb = std::min<std::size_t>(
        cfg.gas_buckets - 1,
        static_cast<std::size_t>((gas_limit - std::min(gas_limit, lo)) * cfg.gas_buckets / span));
    return static_cast<int>((pb * cfg.congestion_buckets + cb) * cfg.gas_buckets + gb);
  }
};

enum GasAction : int { kDecrease = 0, kHold = 1, kIncrease = 2 };

namespace detail {

inline std::uint64_t draw_pending(const GasSimConfig& cfg, Rng& rng) {
  if (cfg.pending_jitter == 0) return cfg.mean_pending;
  const std::uint64_t lo = cfg.mean_pending >= cfg.pending_jitter
                               ? cfg.mean_pending - cfg.pending_jitter
                               : 0;
  const std::uint64_t hi = cfg.mean_pending + cfg.pending_jitter;
  return lo + rng.below(hi - lo + 1);
}

// Fee-tiered congestion: pending transactions carry seeded fees; the block
// admits the highest-fee ones first, and congestion is the excluded share of
// the above-median-fee set.
inline double fee_tiered_congestion(std::uint64_t n_pending, std::uint64_t included,
                                    Rng& rng) {
  if (n_pending == 0) return 0.0;
  std::vector<double> fees(n_pending);
  for (double& f : fees) f = rng.uniform(1.0, 100.0);
  std::vector<double> sorted = fees;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[n_pending / 2];
  std::size_t above = 0, above_excluded = 0;
  // Highest-fee-first inclusion: the excluded set is the `n_pending -
  // included` lowest fees.
  const std::uint64_t excluded = n_pending - included;
  for (std::uint64_t i = 0; i < n_pending; ++i) {
    if (fees[i] > median) {
      ++above;
      // fee rank of fees[i]: how many fees are strictly lower
      std::size_t rank = 0;
      for (std::uint64_t j = 0; j < n_pending; ++j) {
        if (fees[j] < fees[i]) ++rank;
      }
      if (rank < excluded) ++above_excluded;
    }
  }
  if (above == 0) return 0.0;
  return static_cast<double>(above_excluded) / static_cast<double>(above);
}

}  // namespace detail

// One block: adjust the gas limit (clamped to [increment, max]), process the
// current pending set, then refresh arrivals for the next state.
inline std::pair<GasEnvState, StepOutcome> env_step(const GasEnvState& state, int action,
                                                    const GasSimConfig& cfg, Rng& rng) {
  if (action < kDecrease || action > kIncrease) {
    throw std::invalid_argument("env_step: action must be 0 (decrease), 1 (hold), 2 (increase)");
  }
  std::uint64_t gas = state.gas_limit;
  if (action == kDecrease) {
    gas = gas > cfg.gas_limit_increment * 2 ? gas - cfg.gas_limit_increment
                                            : cfg.gas_limit_increment;
  } else if (action == kIncrease) {
    gas = std::min(cfg.max_gas_limit, gas + cfg.gas_limit_increment);
  }

  StepOutcome outcome =
      simulate_block(state.pending, gas, cfg.model, cfg.overhead, cfg.congestion_penalty);
  if (cfg.congestion_mode == CongestionMode::FeeTiered) {
    outcome.congestion =
        detail::fee_tiered_congestion(state.pending, outcome.txs_included, rng);
    outcome.block_processing_time =
        cfg.overhead + cfg.model.t_per_tx * static_cast<double>(outcome.txs_included) +
        cfg.congestion_penalty * outcome.congestion;
    outcome.reward = -outcome.block_processing_time;
  }

  GasEnvState next;
  next.gas_limit = gas;
  next.congestion = outcome.congestion;
  next.pending = detail::draw_pending(cfg, rng);
  return {next, outcome};
}

// Tabular-agent surface over env_step.
class GasEnv {
 public:
  explicit GasEnv(GasSimConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  const GasSimConfig& config() const { return cfg_; }
  int n_states() const {
    return static_cast<int>(cfg_.pending_buckets * cfg_.congestion_buckets * cfg_.gas_buckets);
  }
  int n_actions() const { return 3; }

  int reset(Rng& rng) {
    state_ = GasEnvState{detail::draw_pending(cfg_, rng), cfg_.initial_gas_limit, 0.0};
    return state_.encode(cfg_);
  }

  StepResult step(int action, Rng& rng) {
    auto [next, outcome] = env_step(state_, action, cfg_, rng);
    state_ = next;
    last_outcome_ = outcome;
    return {next.encode(cfg_), outcome.reward, false};
  }

  const GasEnvState& state() const { return state_; }
  const StepOutcome& last_outcome() const { return last_outcome_; }

 private:
  GasSimConfig cfg_;
  GasEnvState state_;
  StepOutcome last_outcome_;
};

struct Algorithm1Config {
  std::uint64_t gas_limit = 21000;            // starting value
  std::uint64_t gas_limit_increment = 21000;
  std::uint64_t max_gas_limit = 336000;
  double target_time = 0.5;                   // seconds
  double congestion_threshold = 1.0;          // fraction in [0,1]
  std::size_t max_iterations = 200;

  void validate() const {
    std::vector<std::string> problems;
    if (gas_limit_increment == 0) problems.push_back("gas_limit_increment must be positive");
    if (gas_limit == 0 || gas_limit > max_gas_limit) {
      problems.push_back("gas_limit must lie in (0, max_gas_limit]");
    }
    if (congestion_threshold < 0.0 || congestion_threshold > 1.0) {
      problems.push_back("congestion_threshold must lie in [0,1]");
    }
    if (max_iterations == 0) problems.push_back("max_iterations must be positive");
    if (!problems.empty()) throw ConfigError(problems);
  }
};

struct Algorithm1Iteration {
  std::size_t iteration = 0;
  std::uint64_t gas_limit = 0;
  double expected_time = 0.0;
  double congestion = 0.0;
};

struct Algorithm1Result {
  std::uint64_t final_gas_limit = 0;
  bool converged = false;
  std::vector<Algorithm1Iteration> trace;
};

// Deterministic gas-limit search. Per iteration: simulate expected
// processing time and congestion at the current limit; stop when the time
// sits within one t_per_tx of the target and congestion is at or below the
// threshold; otherwise step the limit down when time or congestion is too
// high, and up when too low. The limit never leaves
// [increment, max_gas_limit].
inline Algorithm1Result algorithm1_optimize(const Algorithm1Config& cfg, const GasModel& model,
                                            double overhead = 0.0,
                                            double congestion_penalty = 0.0) {
  cfg.validate();
  model.validate();
  Algorithm1Result result;
  std::uint64_t gas = std::max(cfg.gas_limit, cfg.gas_limit_increment);

  // Slack absorbs rounding at the tolerance boundary (e.g. 0.4 - 0.3 lands a
  // few ulps above 0.1), which would otherwise oscillate forever.
  const double slack = 1e-9 * (1.0 + std::abs(cfg.target_time));
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    const StepOutcome sim =
        simulate_block(model.n_pending, gas, model, overhead, congestion_penalty);
    result.trace.push_back({it, gas, sim.block_processing_time, sim.congestion});

    const bool time_ok =
        std::abs(sim.block_processing_time - cfg.target_time) <= model.t_per_tx + slack;
    const bool congestion_ok = sim.congestion <= cfg.congestion_threshold;
    if (time_ok && congestion_ok) {
      result.converged = true;
      break;
    }
    const bool too_high =
        sim.block_processing_time > cfg.target_time + model.t_per_tx + slack ||
        !congestion_ok;
    if (too_high) {
      gas = gas > 2 * cfg.gas_limit_increment ? gas - cfg.gas_limit_increment
                                              : cfg.gas_limit_increment;
    } else {
      gas = std::min(cfg.max_gas_limit, gas + cfg.gas_limit_increment);
    }
  }
  result.final_gas_limit = result.trace.back().gas_limit;
  return result;
}

// Figure 1/2 data surface: one row per simulated block.
struct GasRlBlockRow {
  std::size_t block = 0;    // global block index
  std::size_t episode = 0;
  std::uint64_t gas_limit = 0;
  double throughput = 0.0;  // transactions included
  double epsilon = 0.0;
  double learning_rate = 0.0;
  double reward = 0.0;
};

struct GasRlConfig {
  GasSimConfig sim = GasSimConfig::defaults();
  RlHyper hp{.alpha = 0.2, .gamma = 0.9, .epsilon = 1.0, .epsilon_decay = 0.98,
             .epsilon_floor = 0.02};
  std::size_t episodes = 300;
  std::size_t blocks_per_episode = 64;
  std::uint64_t seed = 7;
};

struct GasRlResult {
  QTable table;
  std::vector<GasRlBlockRow> rows;
  std::vector<double> episode_returns;
  std::vector<double> episode_epsilons;
};

// Trains the tabular agent on the block simulator and records the per-block
// trace the paper plots: throughput, gas limit, epsilon and learning rate.
inline GasRlResult run_gas_rl_experiment(const GasRlConfig& cfg) {
  cfg.sim.validate();
  cfg.hp.validate();
  GasEnv env(cfg.sim);
  GasRlResult result;
  Rng rng(derive_seed(cfg.seed, 55));
  const std::vector<int> actions{0, 1, 2};

  double epsilon = cfg.hp.epsilon;
  std::size_t block = 0;
  for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
    int state = env.reset(rng);
    double ret = 0.0;
    for (std::size_t b = 0; b < cfg.blocks_per_episode; ++b) {
      const int action = epsilon_greedy(result.table, state, actions, epsilon, rng);
      const StepResult sr = env.step(action, rng);
      q_update(result.table, {state, action, sr.reward, sr.next_state, false, 3}, cfg.hp);
      ret += sr.reward;

      result.rows.push_back({block++, ep, env.state().gas_limit,
                             static_cast<double>(env.last_outcome().txs_included), epsilon,
                             cfg.hp.alpha, sr.reward});
      state = sr.next_state;
    }
    result.episode_returns.push_back(ret);
    result.episode_epsilons.push_back(epsilon);
    epsilon = std::max(cfg.hp.epsilon_floor, epsilon * cfg.hp.epsilon_decay);
  }
  return result;
}

}  // namespace ethgnn
