#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pxrl/errors.hpp"

namespace pxrl {

// Fixed-horizon batch of transitions, flattened as [step * n_actors + actor].
// reward_learn is the post-perturbation reward the learner sees; reward_ext
// is what evaluation metrics report. behavior_logp is log pi_b of the taken
// action under the distribution it was actually sampled from. next_value is
// the bootstrap value V(s_{t+1}), evaluated on the true successor observation
// before any reset; for mid-episode steps the recursion reads the next row's
// value instead.
struct Rollout {
  int horizon = 0;
  int n_actors = 0;
  int obs_size = 0;
  int n_actions = 0;

  std::vector<double> observations;  // [T * A * obs_size]
  std::vector<int> actions;
  std::vector<double> behavior_logp;
  std::vector<double> reward_ext;
  std::vector<double> reward_learn;
  std::vector<double> values;
  std::vector<double> next_values;
  std::vector<std::uint8_t> terminated;
  std::vector<std::uint8_t> truncated;
  // [T * A * n_actions], empty when shaping is off. An all-zero row marks a
  // step the apply-probability gate left unshaped (sporadic draws are
  // strictly positive and structured rows sum to 1, so zero is unambiguous).
  std::vector<double> epsilons;

  std::vector<double> advantages;
  std::vector<double> returns;

  void resize(int T, int actors, int obs_dim, int actions_dim, bool store_epsilons) {
    horizon = T;
    n_actors = actors;
    obs_size = obs_dim;
    n_actions = actions_dim;
    const std::size_t n = static_cast<std::size_t>(T) * actors;
    observations.assign(n * obs_dim, 0.0);
    actions.assign(n, 0);
    behavior_logp.assign(n, 0.0);
    reward_ext.assign(n, 0.0);
    reward_learn.assign(n, 0.0);
    values.assign(n, 0.0);
    next_values.assign(n, 0.0);
    terminated.assign(n, 0);
    truncated.assign(n, 0);
    epsilons.assign(store_epsilons ? n * actions_dim : 0, 0.0);
    advantages.assign(n, 0.0);
    returns.assign(n, 0.0);
  }

  std::size_t size() const { return actions.size(); }
  std::size_t index(int t, int actor) const {
    return static_cast<std::size_t>(t) * n_actors + actor;
  }
  const double* observation(std::size_t i) const { return observations.data() + i * obs_size; }
};

// Standard GAE recursion on the learner rewards:
//   delta_t = r_t + gamma * V(s_{t+1}) * (1 - terminated_t) - V(s_t)
//   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
// where done cuts the chain at both terminal and truncated boundaries and
// only termination zeroes the bootstrap. Return target = A_t + V(s_t).
inline void gae_advantages(Rollout& rollout, double gamma, double lambda) {
  for (int actor = 0; actor < rollout.n_actors; ++actor) {
    double carry = 0.0;
    for (int t = rollout.horizon - 1; t >= 0; --t) {
      const std::size_t i = rollout.index(t, actor);
      const bool boundary = rollout.terminated[i] || rollout.truncated[i];
      const double next_v = (boundary || t == rollout.horizon - 1)
                                ? rollout.next_values[i]
                                : rollout.values[rollout.index(t + 1, actor)];
      const double nonterminal = rollout.terminated[i] ? 0.0 : 1.0;
      const double delta =
          rollout.reward_learn[i] + gamma * next_v * nonterminal - rollout.values[i];
      carry = delta + gamma * lambda * (boundary ? 0.0 : 1.0) * carry;
      rollout.advantages[i] = carry;
      rollout.returns[i] = carry + rollout.values[i];
      if (!std::isfinite(carry))
        throw NumericalError("gae_advantages: non-finite advantage at step " + std::to_string(t));
    }
  }
}

// In-place normalization to mean 0, std 1 over the whole batch.
inline void normalize_advantages(std::vector<double>& advantages, double std_floor = 1e-8) {
  if (advantages.empty()) return;
  double mean = 0.0;
  for (double a : advantages) mean += a;
  mean /= static_cast<double>(advantages.size());
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(advantages.size());
  const double scale = 1.0 / std::max(std::sqrt(var), std_floor);
  for (double& a : advantages) a = (a - mean) * scale;
}

}  // namespace pxrl
