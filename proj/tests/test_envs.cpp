#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <vector>

#include "pxrl/envs.hpp"

using namespace pxrl;

namespace {

// Solves (I - gamma * P_pi) v = r_pi by Gaussian elimination; independent of
// value_iteration.
std::vector<double> evaluate_policy(const RandomMdp& mdp, const std::vector<int>& policy) {
  const int n = mdp.n_states;
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
  for (int s = 0; s < n; ++s) {
    for (int s2 = 0; s2 < n; ++s2)
      m[s][s2] = (s == s2 ? 1.0 : 0.0) - mdp.discount * mdp.transition(s, policy[s], s2);
    m[s][n] = mdp.reward(s, policy[s]);
  }
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int row = col + 1; row < n; ++row)
      if (std::fabs(m[row][col]) > std::fabs(m[pivot][col])) pivot = row;
    std::swap(m[col], m[pivot]);
    for (int row = 0; row < n; ++row) {
      if (row == col) continue;
      const double f = m[row][col] / m[col][col];
      for (int k = col; k <= n; ++k) m[row][k] -= f * m[col][k];
    }
  }
  std::vector<double> v(n);
  for (int s = 0; s < n; ++s) v[s] = m[s][n] / m[s][s];
  return v;
}

}  // namespace

TEST(Reset, SameSeedSameObservation) {
  for (const char* id : {"sparse-cartpole", "chain:10", "random-mdp:4x2:7"}) {
    auto env = make_env(id);
    const auto a = env->reset(42);
    const auto b = env->reset(42);
    EXPECT_EQ(a, b) << id;
  }
}

TEST(Reset, ChainStartsAtStateOne) {
  ChainMdp env(ChainMdpConfig{.length = 12});
  for (std::uint64_t seed : {0ull, 5ull, 999ull}) {
    const auto obs = env.reset(seed);
    for (int i = 0; i < 12; ++i) EXPECT_DOUBLE_EQ(obs[i], i == 1 ? 1.0 : 0.0);
    EXPECT_DOUBLE_EQ(obs[12], 0.0);  // elapsed-time feature starts at zero
  }
}

TEST(Reset, CartPoleStartsHangingDown) {
  SparseCartPole env;
  double max_offset = 0.0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto obs = env.reset(seed);
    // theta = pi + delta; recover delta from the cos/sin observation
    const double delta = std::atan2(-obs[3], -obs[2]);
    EXPECT_LE(std::fabs(delta), 0.05);
    max_offset = std::max(max_offset, std::fabs(delta));
    EXPECT_LE(std::fabs(obs[0]), 0.05);  // cart near center
  }
  EXPECT_GE(max_offset, 0.03);  // noise actually spreads over the range
}

TEST(Step, ChainLeftFromStartPaysDistractor) {
  ChainMdp env;
  env.reset(0);
  const auto result = env.step(0);
  EXPECT_DOUBLE_EQ(result.reward_ext, 0.001);
  EXPECT_DOUBLE_EQ(result.observation[0], 1.0);
  EXPECT_FALSE(result.terminated);
}

TEST(Step, ChainRightRunReachesGoal) {
  ChainMdp env(ChainMdpConfig{.length = 40});
  env.reset(0);
  StepResult result;
  for (int i = 0; i < 38; ++i) {
    result = env.step(1);
    if (i < 37) {
      EXPECT_DOUBLE_EQ(result.reward_ext, 0.0);
      EXPECT_FALSE(result.terminated);
    }
  }
  EXPECT_DOUBLE_EQ(result.reward_ext, 1.0);
  EXPECT_TRUE(result.terminated);
  EXPECT_DOUBLE_EQ(result.observation[39], 1.0);
}

TEST(Step, ChainTruncatesAtTwiceLength) {
  ChainMdp env(ChainMdpConfig{.length = 5});
  env.reset(0);
  StepResult result;
  for (int i = 0; i < 10; ++i) result = env.step(0);  // bounce on the left end
  EXPECT_TRUE(result.truncated);
  EXPECT_THROW(env.step(0), UsageError);
}

TEST(Step, CartPoleHangingGivesNoReward) {
  SparseCartPole env;
  env.reset(3);
  for (int i = 0; i < 50; ++i) {
    const auto result = env.step(1);
    EXPECT_DOUBLE_EQ(result.reward_ext, 0.0);
  }
}

TEST(Step, CartPoleRewardsHeldUprightPole) {
  SparseCartPole env;
  env.reset(0);
  env.set_state(0.0, 0.0, 0.05, 0.0);  // just off upright
  const auto result = env.step(1);
  EXPECT_DOUBLE_EQ(result.reward_ext, 1.0);
}

TEST(Step, CartPoleTerminatesOffTrack) {
  SparseCartPole env;
  env.reset(0);
  env.set_state(2.39, 3.0, 0.0, 0.0);
  StepResult result = env.step(2);
  EXPECT_TRUE(result.terminated);
  EXPECT_DOUBLE_EQ(result.reward_ext, 0.0);  // no reward on the failure step
}

TEST(Step, InvalidActionThrows) {
  SparseCartPole cart;
  cart.reset(0);
  EXPECT_THROW(cart.step(3), UsageError);
  ChainMdp chain;
  chain.reset(0);
  EXPECT_THROW(chain.step(-1), UsageError);
}

TEST(Step, TrajectoryDeterminism) {
  auto run = [](std::uint64_t seed) {
    SparseCartPole env;
    std::vector<double> trace;
    auto obs = env.reset(seed);
    trace.insert(trace.end(), obs.begin(), obs.end());
    int action = 0;
    for (int i = 0; i < 200; ++i) {
      const auto result = env.step(action);
      trace.insert(trace.end(), result.observation.begin(), result.observation.end());
      trace.push_back(result.reward_ext);
      if (result.terminated || result.truncated) break;
      action = (action + 1) % 3;
    }
    return trace;
  };
  const auto a = run(11);
  const auto b = run(11);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Step, CartPoleHangingEquilibriumIsStable) {
  SparseCartPole env;
  env.reset(17);
  for (int i = 0; i < 100; ++i) env.step(1);  // no-op force
  double d = env.theta() - std::numbers::pi;
  while (d > std::numbers::pi) d -= 2 * std::numbers::pi;
  while (d < -std::numbers::pi) d += 2 * std::numbers::pi;
  EXPECT_LT(std::fabs(d), 0.2);
}

TEST(ValueIteration, SingleStateGeometricSeries) {
  RandomMdp mdp;
  mdp.n_states = 1;
  mdp.n_actions = 1;
  mdp.discount = 0.9;
  mdp.transitions = {1.0};
  mdp.rewards = {1.0};
  const auto result = value_iteration(mdp, 1e-12);
  EXPECT_NEAR(result.values[0], 10.0, 1e-9);
}

TEST(ValueIteration, ZeroRewardsGiveZeroValues) {
  auto mdp = make_random_mdp(6, 3, 123);
  std::fill(mdp.rewards.begin(), mdp.rewards.end(), 0.0);
  const auto result = value_iteration(mdp);
  for (double v : result.values) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(ValueIteration, MatchesPolicyEnumeration) {
  const auto mdp = make_random_mdp(5, 2, 99, 0.9);
  const auto vi = value_iteration(mdp, 1e-12);
  std::vector<double> best(5, -1e300);
  for (int mask = 0; mask < 32; ++mask) {
    std::vector<int> policy(5);
    for (int s = 0; s < 5; ++s) policy[s] = (mask >> s) & 1;
    const auto v = evaluate_policy(mdp, policy);
    for (int s = 0; s < 5; ++s) best[s] = std::max(best[s], v[s]);
  }
  for (int s = 0; s < 5; ++s) EXPECT_NEAR(vi.values[s], best[s], 1e-6);
}

TEST(ValueIteration, RejectsNonStochasticRows) {
  RandomMdp mdp;
  mdp.n_states = 2;
  mdp.n_actions = 1;
  mdp.discount = 0.5;
  mdp.transitions = {0.5, 0.4, 0.0, 1.0};  // first row sums to 0.9
  mdp.rewards = {0.0, 0.0};
  EXPECT_THROW(value_iteration(mdp), ConfigError);
}

TEST(ValueIteration, GreedyTieBreaksTowardLowestAction) {
  RandomMdp mdp;
  mdp.n_states = 1;
  mdp.n_actions = 3;
  mdp.discount = 0.0;
  mdp.transitions = {1.0, 1.0, 1.0};
  mdp.rewards = {2.0, 2.0, 1.0};  // actions 0 and 1 tie
  const auto result = value_iteration(mdp, 1e-12);
  EXPECT_EQ(result.greedy_policy[0], 0);
}

TEST(Discretize, IdenticalObservationsShareKeys) {
  SparseCartPole env;
  const auto obs = env.reset(1);
  EXPECT_EQ(env.discretize(obs), env.discretize(obs));
}

TEST(Discretize, TabularKeysAreExactIndices) {
  ChainMdp chain(ChainMdpConfig{.length = 8});
  auto obs = chain.reset(0);
  EXPECT_EQ(chain.discretize(obs), (StateKey{1}));
  obs = chain.step(1).observation;
  EXPECT_EQ(chain.discretize(obs), (StateKey{2}));

  RandomMdpEnv mdp_env(make_random_mdp(4, 2, 3), 3);
  obs = mdp_env.reset(0);
  EXPECT_EQ(mdp_env.discretize(obs), (StateKey{0}));
}

TEST(Discretize, AdjacentBinsDifferInOneCoordinate) {
  const GridDiscretizer grid({0.0, -1.0}, {10.0, 1.0}, 10);
  // walk bin centers along each dimension; enumerate the edges
  for (int d = 0; d < 2; ++d) {
    for (int bin = 0; bin + 1 < 10; ++bin) {
      std::vector<double> a{5.0, 0.0}, b{5.0, 0.0};
      const double lo = d == 0 ? 0.0 : -1.0;
      const double width = d == 0 ? 1.0 : 0.2;
      a[d] = lo + (bin + 0.5) * width;
      b[d] = lo + (bin + 1.5) * width;
      const auto ka = grid.key(a);
      const auto kb = grid.key(b);
      int diffs = 0;
      for (int k = 0; k < 2; ++k)
        if (ka[k] != kb[k]) ++diffs;
      EXPECT_EQ(diffs, 1);
      EXPECT_EQ(kb[d], ka[d] + 1);
    }
  }
}

TEST(Discretize, OutOfRangeClampsToEdgeBins) {
  const GridDiscretizer grid({0.0}, {1.0}, 10);
  EXPECT_EQ(grid.key(std::vector<double>{-5.0})[0], 0);
  EXPECT_EQ(grid.key(std::vector<double>{5.0})[0], 9);
}

TEST(RandomMdpIo, SaveLoadRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "pxrl_mdp_test.txt").string();
  const auto mdp = make_random_mdp(4, 3, 55, 0.85);
  save_random_mdp(mdp, path);
  const auto loaded = load_random_mdp(path);
  EXPECT_EQ(loaded.n_states, mdp.n_states);
  EXPECT_EQ(loaded.n_actions, mdp.n_actions);
  EXPECT_DOUBLE_EQ(loaded.discount, mdp.discount);
  for (std::size_t i = 0; i < mdp.transitions.size(); ++i)
    EXPECT_DOUBLE_EQ(loaded.transitions[i], mdp.transitions[i]);
  for (std::size_t i = 0; i < mdp.rewards.size(); ++i)
    EXPECT_DOUBLE_EQ(loaded.rewards[i], mdp.rewards[i]);
  std::filesystem::remove(path);
}

TEST(RandomMdpGen, RowsAreStochastic) {
  const auto mdp = make_random_mdp(7, 4, 2024);
  EXPECT_NO_THROW(mdp.check_stochastic(1e-12));
}

TEST(EnvFactory, ParsesIds) {
  EXPECT_EQ(make_env("sparse-cartpole")->id(), "sparse-cartpole");
  EXPECT_EQ(make_env("chain:17")->id(), "chain:17");
  EXPECT_EQ(make_env("random-mdp:5x2:9")->id(), "random-mdp:5x2:9");
  EXPECT_EQ(make_env("chain:17")->observation_size(), 18);  // one-hot + elapsed time
  EXPECT_EQ(make_env("random-mdp:5x2:9")->action_count(), 2);
}

TEST(EnvFactory, RejectsBadIds) {
  EXPECT_THROW(make_env("mountain-car"), ConfigError);
  EXPECT_THROW(make_env("chain:xyz"), ConfigError);
  EXPECT_THROW(make_env("chain:2"), ConfigError);  // below minimum length
  EXPECT_THROW(make_env("random-mdp:5:9"), ConfigError);
}
