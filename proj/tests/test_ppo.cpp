#include <gtest/gtest.h>

#include "ethgnn/ppo.hpp"

using namespace ethgnn;

namespace {

PpoTrajectory make_traj(PpoParams& params, Rng& rng, std::size_t steps,
                        std::size_t state_dim) {
  PpoTrajectory traj;
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<double> state(state_dim);
    for (double& v : state) v = rng.normal();
    double log_p = 0.0;
    const int action = sample_action(params.policy, state, rng, &log_p);
    traj.states.push_back(state);
    traj.actions.push_back(action);
    traj.log_probs.push_back(log_p);
    traj.values.push_back(value_estimate(params.value, state));
    traj.rewards_norm.push_back(rng.normal());
  }
  return traj;
}

// Independent scalar evaluation of the full PPO objective, written from the
// definition; used as the finite-difference oracle.
double ppo_loss_oracle(const PpoParams& params, const PpoTrajectory& traj) {
  const double eps = params.cfg.clip_ratio;
  double surrogate = 0.0, value_mse = 0.0, entropy = 0.0;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const auto logits = params.policy.forward(traj.states[t]);
    const auto probs = softmax_row(logits);
    const double log_p = std::log(probs[static_cast<std::size_t>(traj.actions[t])]);
    const double rho = std::exp(log_p - traj.log_probs[t]);
    const double clipped = std::min(std::max(rho, 1.0 - eps), 1.0 + eps);
    surrogate += std::min(rho * traj.advantages[t], clipped * traj.advantages[t]);
    for (double p : probs) {
      if (p > 0) entropy -= p * std::log(p);
    }
    const double v = params.value.forward(traj.states[t])[0];
    value_mse += (v - traj.returns[t]) * (v - traj.returns[t]);
  }
  const double n = static_cast<double>(traj.size());
  return -surrogate / n + params.cfg.value_coef * (value_mse / n) -
         params.cfg.entropy_coef * (entropy / n);
}

}  // namespace

TEST(Advantages, ValuesEqualReturnsGiveZeros) {
  PpoTrajectory traj;
  traj.states = {{0.0}, {0.0}};
  traj.actions = {0, 0};
  traj.log_probs = {0.0, 0.0};
  traj.rewards_norm = {1.0, 2.0};
  traj.values = {2.0, 2.0};  // equal to the returns below (gamma 0.5)
  compute_advantages(traj, 0.5);
  EXPECT_EQ(traj.returns, (std::vector<double>{2.0, 2.0}));
  EXPECT_EQ(traj.advantages, (std::vector<double>{0.0, 0.0}));
}

// rewards [1,1], gamma 0, values [0,0]: returns [1,1], raw advantages [1,1],
// centering gives [0,0] and the std guard skips the rescale.
TEST(Advantages, ConstantCaseCentersToZero) {
  PpoTrajectory traj;
  traj.states = {{0.0}, {0.0}};
  traj.actions = {0, 0};
  traj.log_probs = {0.0, 0.0};
  traj.rewards_norm = {1.0, 1.0};
  traj.values = {0.0, 0.0};
  compute_advantages(traj, 0.0);
  EXPECT_EQ(traj.returns, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(traj.advantages, (std::vector<double>{0.0, 0.0}));
}

// rewards [1,0,2], gamma 0.5: backward recursion gives G2=2, G1=1, G0=1.5.
TEST(Advantages, HandComputedBackwardRecursion) {
  PpoTrajectory traj;
  traj.states = {{0.0}, {0.0}, {0.0}};
  traj.actions = {0, 0, 0};
  traj.log_probs = {0.0, 0.0, 0.0};
  traj.rewards_norm = {1.0, 0.0, 2.0};
  traj.values = {0.0, 0.0, 0.0};
  compute_advantages(traj, 0.5);
  EXPECT_EQ(traj.returns, (std::vector<double>{1.5, 1.0, 2.0}));

  // Raw advantages equal the returns; standardized by hand:
  const double mean = (1.5 + 1.0 + 2.0) / 3.0;
  double var = 0.0;
  for (double g : {1.5, 1.0, 2.0}) var += (g - mean) * (g - mean);
  const double sd = std::sqrt(var / 3.0);
  EXPECT_NEAR(traj.advantages[0], (1.5 - mean) / sd, 1e-12);
  EXPECT_NEAR(traj.advantages[1], (1.0 - mean) / sd, 1e-12);
  EXPECT_NEAR(traj.advantages[2], (2.0 - mean) / sd, 1e-12);
}

TEST(Advantages, EmptyTrajectoryThrows) {
  PpoTrajectory traj;
  EXPECT_THROW(compute_advantages(traj, 0.9), std::invalid_argument);
}

TEST(Advantages, StandardizedBatchHasMeanZeroStdOne) {
  Rng rng(31);
  PpoParams params = PpoParams::init(3, 2, PpoConfig{}, 1);
  PpoTrajectory traj = make_traj(params, rng, 16, 3);
  compute_advantages(traj, 0.9);
  double mean = 0.0, var = 0.0;
  for (double a : traj.advantages) mean += a;
  mean /= 16.0;
  for (double a : traj.advantages) var += (a - mean) * (a - mean);
  EXPECT_NEAR(mean, 0.0, 1e-9);
  EXPECT_NEAR(std::sqrt(var / 16.0), 1.0, 1e-9);
}

TEST(PpoUpdate, ZeroAdvantagesLeavePolicyLogitsUnchanged) {
  PpoConfig cfg;
  cfg.entropy_coef = 0.0;  // isolate the surrogate term
  PpoParams params = PpoParams::init(2, 3, cfg, 2);
  Rng rng(32);
  PpoTrajectory traj = make_traj(params, rng, 4, 2);
  traj.returns.assign(4, 0.0);
  traj.advantages.assign(4, 0.0);
  for (std::size_t t = 0; t < 4; ++t) {
    traj.returns[t] = value_estimate(params.value, traj.states[t]);  // zero value error
  }
  const auto before = params.policy.flatten();
  const auto [stats, grads] = ppo_loss_and_grads(params, traj);
  EXPECT_DOUBLE_EQ(stats.policy_loss, 0.0);
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(grads[i], 0.0) << "policy grad " << i;
  }
}

// Single step, positive advantage, ratio starting at 1 (inside the band):
// after one update the stored action's log-probability must rise.
TEST(PpoUpdate, PositiveAdvantageRaisesActionLogProb) {
  PpoParams params = PpoParams::init(2, 3, PpoConfig{}, 3);
  Rng rng(33);
  PpoTrajectory traj = make_traj(params, rng, 1, 2);
  traj.returns = {traj.values[0]};  // no value pressure
  traj.advantages = {1.0};

  const auto logits = params.policy.forward(traj.states[0]);
  const double before = std::log(softmax_row(logits)[traj.actions[0]]);
  ppo_update(params, traj, params.cfg.lr);
  const auto after_logits = params.policy.forward(traj.states[0]);
  const double after = std::log(softmax_row(after_logits)[traj.actions[0]]);
  EXPECT_GT(after, before);
}

// Full PPO loss gradient on a 3-step trajectory against central finite
// differences of an independent loss evaluation.
TEST(PpoUpdate, GradientMatchesFiniteDifferences) {
  PpoParams params = PpoParams::init(3, 4, PpoConfig{.hidden = 8}, 4);
  Rng rng(34);
  PpoTrajectory traj = make_traj(params, rng, 3, 3);
  compute_advantages(traj, 0.9);
  // Shift the stored log-probs so the ratios sit strictly inside or outside
  // the clip band but never on its edge.
  for (double& lp : traj.log_probs) lp += 0.03;

  const auto [stats, analytic] = ppo_loss_and_grads(params, traj);
  EXPECT_NEAR(stats.loss, ppo_loss_oracle(params, traj), 1e-12);

  PpoParams probe = params;
  std::vector<double> flat = params.flatten();
  const double step = 1e-5;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double save = flat[i];
    flat[i] = save + step;
    probe.unflatten(flat);
    const double up = ppo_loss_oracle(probe, traj);
    flat[i] = save - step;
    probe.unflatten(flat);
    const double down = ppo_loss_oracle(probe, traj);
    flat[i] = save;
    const double fd = (up - down) / (2 * step);
    const double rel =
        std::abs(analytic[i] - fd) / std::max({std::abs(analytic[i]), std::abs(fd), 1e-6});
    EXPECT_LT(rel, 1e-4) << "param " << i;
  }
}

// Value head regression sanity: on a fixed-return signal the value network
// converges to that return within 5%.
TEST(PpoUpdate, ValueNetworkConvergesToFixedReturn) {
  PpoConfig cfg;
  cfg.lr = 3e-3;
  PpoParams params = PpoParams::init(2, 2, cfg, 5);
  Rng rng(35);
  const double target = 4.0;
  for (int iter = 0; iter < 4000; ++iter) {
    PpoTrajectory traj;
    for (int t = 0; t < 4; ++t) {
      std::vector<double> state{rng.uniform(), rng.uniform()};
      double lp;
      const int a = sample_action(params.policy, state, rng, &lp);
      traj.states.push_back(state);
      traj.actions.push_back(a);
      traj.log_probs.push_back(lp);
      traj.values.push_back(value_estimate(params.value, state));
      traj.rewards_norm.push_back(0.0);
    }
    traj.returns.assign(4, target);
    traj.advantages.assign(4, 0.0);
    ppo_update(params, traj, cfg.lr);
  }
  const std::vector<double> probe{0.5, 0.5};
  EXPECT_NEAR(value_estimate(params.value, probe), target, 0.05 * target);
}

TEST(PpoUpdate, NonFiniteLossAborts) {
  PpoParams params = PpoParams::init(2, 2, PpoConfig{}, 6);
  PpoTrajectory traj;
  traj.states = {{0.0, 0.0}};
  traj.actions = {0};
  traj.log_probs = {0.0};
  traj.values = {0.0};
  traj.rewards_norm = {1.0};
  traj.returns = {std::numeric_limits<double>::infinity()};
  traj.advantages = {0.0};
  EXPECT_THROW(ppo_loss_and_grads(params, traj), std::runtime_error);
}
