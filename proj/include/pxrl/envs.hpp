#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pxrl/errors.hpp"
#include "pxrl/rng.hpp"

namespace pxrl {

// Discretized state identity, used as the count-model key.
using StateKey = std::vector<int>;

struct StateKeyHash {
  std::size_t operator()(const StateKey& key) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int v : key) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

struct StepResult {
  std::vector<double> observation;
  double reward_ext = 0.0;
  bool terminated = false;  // MDP terminal state
  bool truncated = false;   // time-limit cutoff
};

// Deterministic, seedable environment. Rewards emitted here are extrinsic
// only; intrinsic bonuses are added strictly outside this module.
// Instances are single-threaded; run one per actor.
class Env {
 public:
  virtual ~Env() = default;
  virtual std::string id() const = 0;
  virtual int observation_size() const = 0;
  virtual int action_count() const = 0;
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  virtual StepResult step(int action) = 0;
  virtual StateKey discretize(std::span<const double> observation) const = 0;
};

// Uniform grid over documented per-dimension ranges. Out-of-range values
// clamp to the edge bins.
class GridDiscretizer {
 public:
  GridDiscretizer() = default;
  GridDiscretizer(std::vector<double> lo, std::vector<double> hi, int bins_per_dim = 10)
      : lo_(std::move(lo)), hi_(std::move(hi)), bins_(bins_per_dim) {
    if (lo_.size() != hi_.size()) throw ConfigError("discretizer range size mismatch");
    if (bins_ < 1) throw ConfigError("discretizer needs at least one bin");
  }

  StateKey key(std::span<const double> observation) const {
    if (observation.size() != lo_.size()) throw ConfigError("discretize: observation size mismatch");
    StateKey key(observation.size());
    for (std::size_t d = 0; d < observation.size(); ++d) {
      const double t = (observation[d] - lo_[d]) / (hi_[d] - lo_[d]);
      int bin = static_cast<int>(std::floor(t * bins_));
      key[d] = std::clamp(bin, 0, bins_ - 1);
    }
    return key;
  }

  int bins() const { return bins_; }

 private:
  std::vector<double> lo_, hi_;
  int bins_ = 10;
};

// Cart-pole swing-up with a sparse height reward: the pole starts hanging
// down and reward 1 is paid on every step with cos(theta) above the
// threshold while the cart stays on the track. theta = 0 is upright.
// The observation is [x, x_dot, cos theta, sin theta, theta_dot, elapsed],
// with elapsed normalized to [0, 1]; the time-limit cutoff makes elapsed
// time part of the proper state. Count-model keys cover the five physical
// coordinates only.
struct SparseCartPoleConfig {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_half_length = 0.5;
  double force_magnitude = 10.0;
  double timestep = 0.02;
  double x_limit = 2.4;
  double success_threshold = 0.8;  // cos(theta) at which reward turns on
  int max_steps = 500;
};

class SparseCartPole : public Env {
 public:
  explicit SparseCartPole(SparseCartPoleConfig cfg = {}) : cfg_(cfg) {
    if (cfg_.gravity <= 0 || cfg_.cart_mass <= 0 || cfg_.pole_mass <= 0 ||
        cfg_.pole_half_length <= 0 || cfg_.force_magnitude <= 0 || cfg_.timestep <= 0)
      throw ConfigError("sparse-cartpole: physical constants must be positive");
    if (cfg_.success_threshold <= -1.0 || cfg_.success_threshold >= 1.0)
      throw ConfigError("sparse-cartpole: success threshold must be in (-1, 1)");
    discretizer_ = GridDiscretizer({-cfg_.x_limit, -3.0, -1.0, -1.0, -8.0},
                                   {cfg_.x_limit, 3.0, 1.0, 1.0, 8.0});
  }

  std::string id() const override { return "sparse-cartpole"; }
  int observation_size() const override { return 6; }
  int action_count() const override { return 3; }  // push-left, no-op, push-right

  std::vector<double> reset(std::uint64_t seed) override {
    Rng rng(seed);
    x_ = rng.uniform(-0.05, 0.05);
    x_dot_ = rng.uniform(-0.05, 0.05);
    theta_ = std::numbers::pi + rng.uniform(-0.05, 0.05);
    theta_dot_ = rng.uniform(-0.05, 0.05);
    steps_ = 0;
    done_ = false;
    return observe();
  }

  StepResult step(int action) override {
    if (action < 0 || action >= action_count())
      throw UsageError("sparse-cartpole: invalid action index " + std::to_string(action));
    if (done_) throw UsageError("sparse-cartpole: step on finished episode");

    const double force = (action - 1) * cfg_.force_magnitude;
    const double total_mass = cfg_.cart_mass + cfg_.pole_mass;
    const double pml = cfg_.pole_mass * cfg_.pole_half_length;
    const double cos_t = std::cos(theta_);
    const double sin_t = std::sin(theta_);

    const double temp = (force + pml * theta_dot_ * theta_dot_ * sin_t) / total_mass;
    const double theta_acc = (cfg_.gravity * sin_t - cos_t * temp) /
                             (cfg_.pole_half_length * (4.0 / 3.0 - cfg_.pole_mass * cos_t * cos_t / total_mass));
    const double x_acc = temp - pml * theta_acc * cos_t / total_mass;

    // semi-implicit Euler: velocities first, positions with the new velocities
    x_dot_ += cfg_.timestep * x_acc;
    theta_dot_ += cfg_.timestep * theta_acc;
    x_ += cfg_.timestep * x_dot_;
    theta_ += cfg_.timestep * theta_dot_;
    // keep the angle bounded; cos/sin observations are wrap-free anyway
    if (theta_ > std::numbers::pi) theta_ -= 2.0 * std::numbers::pi;
    if (theta_ < -std::numbers::pi) theta_ += 2.0 * std::numbers::pi;
    steps_ += 1;

    StepResult result;
    result.terminated = std::fabs(x_) > cfg_.x_limit;
    result.truncated = !result.terminated && steps_ >= cfg_.max_steps;
    result.reward_ext =
        (!result.terminated && std::cos(theta_) >= cfg_.success_threshold) ? 1.0 : 0.0;
    result.observation = observe();
    done_ = result.terminated || result.truncated;
    return result;
  }

  StateKey discretize(std::span<const double> observation) const override {
    return discretizer_.key(observation.first(5));
  }

  double theta() const { return theta_; }

  // diagnostic hook: place the system at an explicit state
  void set_state(double x, double x_dot, double theta, double theta_dot) {
    x_ = x;
    x_dot_ = x_dot;
    theta_ = theta;
    theta_dot_ = theta_dot;
    steps_ = 0;
    done_ = false;
  }

 private:
  std::vector<double> observe() const {
    return {x_,
            x_dot_,
            std::cos(theta_),
            std::sin(theta_),
            theta_dot_,
            static_cast<double>(steps_) / cfg_.max_steps};
  }

  SparseCartPoleConfig cfg_;
  GridDiscretizer discretizer_;
  double x_ = 0, x_dot_ = 0, theta_ = 0, theta_dot_ = 0;
  int steps_ = 0;
  bool done_ = false;
};

// Deterministic chain of L states, start at 1. Arriving at state 0 pays a
// small distractor reward every time; arriving at state L-1 pays 1 and ends
// the episode. Reaching the goal needs a +L-2 net displacement within the
// 2L-step cap, which a uniform policy essentially never produces.
//
// The observation is the one-hot state plus normalized elapsed time. The
// step cap makes the plain state non-Markovian (remaining-return depends on
// how much episode is left), and a state-only value function would fold
// that horizon difference into spurious per-state offsets.
struct ChainMdpConfig {
  int length = 40;
  double left_reward = 0.001;
  double goal_reward = 1.0;
};

class ChainMdp : public Env {
 public:
  explicit ChainMdp(ChainMdpConfig cfg = {}) : cfg_(cfg) {
    if (cfg_.length < 3) throw ConfigError("chain: length must be at least 3");
  }

  std::string id() const override { return "chain:" + std::to_string(cfg_.length); }
  int observation_size() const override { return cfg_.length + 1; }  // one-hot + elapsed time
  int action_count() const override { return 2; }  // left, right

  std::vector<double> reset(std::uint64_t) override {
    state_ = 1;
    steps_ = 0;
    done_ = false;
    return observe();
  }

  StepResult step(int action) override {
    if (action < 0 || action >= 2)
      throw UsageError("chain: invalid action index " + std::to_string(action));
    if (done_) throw UsageError("chain: step on finished episode");
    state_ = std::clamp(state_ + (action == 0 ? -1 : 1), 0, cfg_.length - 1);
    steps_ += 1;

    StepResult result;
    if (state_ == 0) result.reward_ext = cfg_.left_reward;
    if (state_ == cfg_.length - 1) {
      result.reward_ext = cfg_.goal_reward;
      result.terminated = true;
    }
    result.truncated = !result.terminated && steps_ >= 2 * cfg_.length;
    result.observation = observe();
    done_ = result.terminated || result.truncated;
    return result;
  }

  StateKey discretize(std::span<const double> observation) const override {
    return {index_of(observation)};
  }

 private:
  std::vector<double> observe() const {
    std::vector<double> obs(cfg_.length + 1, 0.0);
    obs[state_] = 1.0;
    obs[cfg_.length] = static_cast<double>(steps_) / (2.0 * cfg_.length);
    return obs;
  }

  static int index_of(std::span<const double> observation) {
    const std::size_t n_states = observation.size() - 1;
    for (std::size_t i = 0; i < n_states; ++i)
      if (observation[i] != 0.0) return static_cast<int>(i);
    return 0;
  }

  ChainMdpConfig cfg_;
  int state_ = 1;
  int steps_ = 0;
  bool done_ = false;
};

// Small explicit MDP with row-stochastic transitions. Substrate for the
// exact value-iteration oracle used by agent correctness tests.
struct RandomMdp {
  int n_states = 0;
  int n_actions = 0;
  double discount = 0.9;
  std::vector<double> transitions;  // [s][a][s'], row-stochastic per (s, a)
  std::vector<double> rewards;      // [s][a]

  double transition(int s, int a, int s2) const {
    return transitions[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  double reward(int s, int a) const { return rewards[static_cast<std::size_t>(s) * n_actions + a]; }

  void check_stochastic(double tol = 1e-12) const {
    for (int s = 0; s < n_states; ++s) {
      for (int a = 0; a < n_actions; ++a) {
        double sum = 0.0;
        for (int s2 = 0; s2 < n_states; ++s2) {
          const double p = transition(s, a, s2);
          if (p < 0.0) throw ConfigError("random-mdp: negative transition probability");
          sum += p;
        }
        if (std::fabs(sum - 1.0) > tol)
          throw ConfigError("random-mdp: transition row (" + std::to_string(s) + "," +
                            std::to_string(a) + ") sums to " + std::to_string(sum));
      }
    }
  }
};

inline RandomMdp make_random_mdp(int n_states, int n_actions, std::uint64_t seed,
                                 double discount = 0.9) {
  if (n_states < 1 || n_actions < 1) throw ConfigError("random-mdp: need at least 1 state and action");
  RandomMdp mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.discount = discount;
  mdp.transitions.resize(static_cast<std::size_t>(n_states) * n_actions * n_states);
  mdp.rewards.resize(static_cast<std::size_t>(n_states) * n_actions);
  Rng rng(derive_seed(seed, 0x6d6470ULL));
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      std::vector<double> row(n_states);
      for (int s2 = 0; s2 < n_states; ++s2) {
        row[s2] = -std::log(1.0 - rng.uniform01());  // Exp(1) draws -> Dirichlet(1) row
        sum += row[s2];
      }
      for (int s2 = 0; s2 < n_states; ++s2)
        mdp.transitions[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2] = row[s2] / sum;
      mdp.rewards[static_cast<std::size_t>(s) * n_actions + a] = rng.uniform01();
    }
  }
  return mdp;
}

struct ValueIterationResult {
  std::vector<double> values;
  std::vector<int> greedy_policy;  // ties broken toward the lowest action index
  int iterations = 0;
};

inline ValueIterationResult value_iteration(const RandomMdp& mdp, double tolerance = 1e-10) {
  if (mdp.discount < 0.0 || mdp.discount >= 1.0)
    throw ConfigError("value_iteration: discount must be in [0, 1)");
  mdp.check_stochastic();
  ValueIterationResult result;
  result.values.assign(mdp.n_states, 0.0);
  result.greedy_policy.assign(mdp.n_states, 0);
  std::vector<double> next(mdp.n_states, 0.0);
  double residual = tolerance + 1.0;
  while (residual > tolerance) {
    residual = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      int best_a = 0;
      for (int a = 0; a < mdp.n_actions; ++a) {
        double q = mdp.reward(s, a);
        for (int s2 = 0; s2 < mdp.n_states; ++s2)
          q += mdp.discount * mdp.transition(s, a, s2) * result.values[s2];
        if (q > best) {
          best = q;
          best_a = a;
        }
      }
      next[s] = best;
      result.greedy_policy[s] = best_a;
      residual = std::max(residual, std::fabs(next[s] - result.values[s]));
    }
    result.values.swap(next);
    result.iterations += 1;
  }
  return result;
}

// Plain-text tabular layout for oracle cross-checks:
//   random-mdp <n_states> <n_actions> <discount>
//   reward <s> <a> <value>          (one line per state-action)
//   transition <s> <a> <s'> <prob>  (one line per entry)
inline void save_random_mdp(const RandomMdp& mdp, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open mdp file for writing: " + path);
  f.precision(17);
  f << "random-mdp " << mdp.n_states << " " << mdp.n_actions << " " << mdp.discount << "\n";
  for (int s = 0; s < mdp.n_states; ++s)
    for (int a = 0; a < mdp.n_actions; ++a) f << "reward " << s << " " << a << " " << mdp.reward(s, a) << "\n";
  for (int s = 0; s < mdp.n_states; ++s)
    for (int a = 0; a < mdp.n_actions; ++a)
      for (int s2 = 0; s2 < mdp.n_states; ++s2)
        f << "transition " << s << " " << a << " " << s2 << " " << mdp.transition(s, a, s2) << "\n";
}

inline RandomMdp load_random_mdp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open mdp file: " + path);
  std::string tag;
  RandomMdp mdp;
  if (!(f >> tag >> mdp.n_states >> mdp.n_actions >> mdp.discount) || tag != "random-mdp")
    throw ConfigError("bad mdp file header: " + path);
  mdp.transitions.assign(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions * mdp.n_states, 0.0);
  mdp.rewards.assign(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions, 0.0);
  while (f >> tag) {
    if (tag == "reward") {
      int s, a;
      double v;
      f >> s >> a >> v;
      mdp.rewards[static_cast<std::size_t>(s) * mdp.n_actions + a] = v;
    } else if (tag == "transition") {
      int s, a, s2;
      double p;
      f >> s >> a >> s2 >> p;
      mdp.transitions[(static_cast<std::size_t>(s) * mdp.n_actions + a) * mdp.n_states + s2] = p;
    } else {
      throw ConfigError("unknown row tag '" + tag + "' in mdp file: " + path);
    }
  }
  mdp.check_stochastic(1e-9);
  return mdp;
}

// Episodic wrapper around an explicit MDP: one-hot observations, seeded
// transition sampling, truncation at episode_cap steps. Start state 0.
class RandomMdpEnv : public Env {
 public:
  RandomMdpEnv(RandomMdp mdp, std::uint64_t construction_seed, int episode_cap = 50)
      : mdp_(std::move(mdp)), construction_seed_(construction_seed), cap_(episode_cap), rng_(0) {
    mdp_.check_stochastic(1e-9);
    if (cap_ < 1) throw ConfigError("random-mdp: episode cap must be positive");
  }

  std::string id() const override {
    return "random-mdp:" + std::to_string(mdp_.n_states) + "x" + std::to_string(mdp_.n_actions) +
           ":" + std::to_string(construction_seed_);
  }
  int observation_size() const override { return mdp_.n_states; }
  int action_count() const override { return mdp_.n_actions; }

  std::vector<double> reset(std::uint64_t seed) override {
    rng_ = Rng(seed);
    state_ = 0;
    steps_ = 0;
    done_ = false;
    return observe();
  }

  StepResult step(int action) override {
    if (action < 0 || action >= mdp_.n_actions)
      throw UsageError("random-mdp: invalid action index " + std::to_string(action));
    if (done_) throw UsageError("random-mdp: step on finished episode");
    StepResult result;
    result.reward_ext = mdp_.reward(state_, action);
    const double u = rng_.uniform01();
    double acc = 0.0;
    int next_state = mdp_.n_states - 1;
    for (int s2 = 0; s2 < mdp_.n_states; ++s2) {
      acc += mdp_.transition(state_, action, s2);
      if (u < acc) {
        next_state = s2;
        break;
      }
    }
    state_ = next_state;
    steps_ += 1;
    result.truncated = steps_ >= cap_;
    result.observation = observe();
    done_ = result.truncated;
    return result;
  }

  StateKey discretize(std::span<const double> observation) const override {
    for (std::size_t i = 0; i < observation.size(); ++i)
      if (observation[i] != 0.0) return {static_cast<int>(i)};
    return {0};
  }

  const RandomMdp& mdp() const { return mdp_; }
  int episode_cap() const { return cap_; }

 private:
  std::vector<double> observe() const {
    std::vector<double> obs(mdp_.n_states, 0.0);
    obs[state_] = 1.0;
    return obs;
  }

  RandomMdp mdp_;
  std::uint64_t construction_seed_;
  int cap_;
  Rng rng_;
  int state_ = 0;
  int steps_ = 0;
  bool done_ = false;
};

// Environment ids: "sparse-cartpole", "chain:<L>", "random-mdp:<S>x<A>:<seed>".
inline std::unique_ptr<Env> make_env(const std::string& id) {
  if (id == "sparse-cartpole") return std::make_unique<SparseCartPole>();
  if (id.rfind("chain:", 0) == 0) {
    ChainMdpConfig cfg;
    try {
      cfg.length = std::stoi(id.substr(6));
    } catch (const std::exception&) {
      throw ConfigError("bad chain length in env id: " + id);
    }
    return std::make_unique<ChainMdp>(cfg);
  }
  if (id.rfind("random-mdp:", 0) == 0) {
    const std::string rest = id.substr(11);
    const auto x = rest.find('x');
    const auto colon = rest.find(':');
    if (x == std::string::npos || colon == std::string::npos || colon < x)
      throw ConfigError("bad random-mdp env id (want random-mdp:<S>x<A>:<seed>): " + id);
    try {
      const int n_states = std::stoi(rest.substr(0, x));
      const int n_actions = std::stoi(rest.substr(x + 1, colon - x - 1));
      const std::uint64_t seed = std::stoull(rest.substr(colon + 1));
      return std::make_unique<RandomMdpEnv>(make_random_mdp(n_states, n_actions, seed), seed);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("bad random-mdp env id (want random-mdp:<S>x<A>:<seed>): " + id);
    }
  }
  throw ConfigError("unknown environment id: " + id);
}

}  // namespace pxrl
