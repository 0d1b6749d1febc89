#pragma once

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "pxrl/agents.hpp"
#include "pxrl/grad_check.hpp"
#include "pxrl/rollout.hpp"

namespace pxrl {

struct VerifyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline Rollout random_rollout(std::uint64_t seed, int T, int actors, int obs_dim, int n_actions) {
  Rng rng(seed);
  Rollout r;
  r.resize(T, actors, obs_dim, n_actions, false);
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (int d = 0; d < obs_dim; ++d) r.observations[i * obs_dim + d] = rng.uniform(-1.0, 1.0);
    r.actions[i] = rng.uniform_int(n_actions);
    r.behavior_logp[i] = std::log(rng.uniform(0.05, 0.95));
    r.reward_learn[i] = rng.uniform(-1.0, 1.0);
    r.reward_ext[i] = r.reward_learn[i];
    r.values[i] = rng.uniform(-1.0, 1.0);
    r.next_values[i] = rng.uniform(-1.0, 1.0);
    if (rng.uniform01() < 0.2) {
      if (rng.uniform01() < 0.5) {
        r.terminated[i] = 1;
      } else {
        r.truncated[i] = 1;
      }
    }
  }
  return r;
}

inline double gae_direct_sum(const Rollout& r, int actor, int t, double gamma, double lambda) {
  double acc = 0.0, weight = 1.0;
  for (int k = t; k < r.horizon; ++k) {
    const std::size_t i = r.index(k, actor);
    const bool boundary = r.terminated[i] || r.truncated[i];
    const double next_v =
        (boundary || k == r.horizon - 1) ? r.next_values[i] : r.values[r.index(k + 1, actor)];
    const double delta =
        r.reward_learn[i] + gamma * next_v * (r.terminated[i] ? 0.0 : 1.0) - r.values[i];
    acc += weight * delta;
    if (boundary) break;
    weight *= gamma * lambda;
  }
  return acc;
}

}  // namespace detail

// Built-in invariant/oracle suite: gradient checks against central finite
// differences, the pseudo-count round trip, the policy-shaping invariances,
// Monte-Carlo statistics of the sporadic bonus, and the GAE recursion against
// direct summation. Everything here runs in a few seconds.
inline std::vector<VerifyResult> run_verification() {
  std::vector<VerifyResult> results;
  auto add = [&results](const std::string& name, bool pass, const std::string& detail) {
    results.push_back({name, pass, detail});
  };

  {  // gradient check, plain network loss
    MlpNetwork net({4, 16, 2}, Activation::kTanh, 2024);
    const std::vector<double> input{0.3, -0.8, 0.5, 1.1};
    auto loss_fn = [&input](const MlpNetwork& n) {
      const auto out = n.forward(input);
      double loss = 0.0;
      for (double o : out) loss += o * o;
      return loss;
    };
    ForwardCache cache;
    const auto& out = net.forward(input, cache);
    std::vector<double> dout(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) dout[i] = 2.0 * out[i];
    std::vector<double> grad(net.param_count(), 0.0);
    net.backward(cache, dout, grad);
    const auto report = finite_diff_check(net, loss_fn, grad, 1e-6);
    std::ostringstream s;
    s << "max rel error " << report.max_rel_error;
    add("gradient-check/tanh-4-16-2", report.pass, s.str());

    auto corrupted = grad;
    corrupted[3] *= 2.0;
    add("gradient-check/detects-injected-fault",
        !finite_diff_check(net, loss_fn, corrupted, 1e-6).pass, "corrupted coordinate flagged");
  }

  {  // gradient check, full PPO loss on a toy batch
    MlpNetwork policy({3, 8, 2}, Activation::kTanh, 7);
    MlpNetwork value({3, 8, 1}, Activation::kTanh, 8);
    auto rollout = detail::random_rollout(9, 4, 1, 3, 2);
    gae_advantages(rollout, 0.99, 0.95);
    std::vector<double> adv = rollout.advantages;
    normalize_advantages(adv);
    std::vector<std::size_t> idx(rollout.size());
    std::iota(idx.begin(), idx.end(), 0);
    PpoConfig cfg;
    const auto lg = ppo_loss(policy, value, rollout, idx, adv, cfg, 1.0);
    auto loss_fn = [&](const MlpNetwork& p) {
      return ppo_loss(p, value, rollout, idx, adv, cfg, 1.0, false).total;
    };
    const auto report = finite_diff_check(policy, loss_fn, lg.policy_grad, 1e-4);
    std::ostringstream s;
    s << "max rel error " << report.max_rel_error;
    add("gradient-check/ppo-loss", report.pass, s.str());
  }

  {  // pseudo-count round trip
    Rng rng(11);
    CountModel model;
    std::vector<long> truth(10, 0);
    bool exact = true;
    for (int i = 0; i < 20000; ++i) {
      const int s = rng.uniform_int(10);
      model.record_visit({s});
      truth[s] += 1;
    }
    double worst = 0.0;
    for (int s = 0; s < 10; ++s) {
      if (truth[s] == 0) continue;
      const auto pair = model.density_pair({s});
      const double recovered = pseudo_count(pair.rho, pair.rho_prime);
      worst = std::max(worst, std::fabs(recovered - static_cast<double>(truth[s])));
      if (worst > 1e-9) exact = false;
    }
    std::ostringstream s;
    s << "worst |recovered - true| = " << worst;
    add("pseudo-count/round-trip", exact, s.str());
  }

  {  // shaping invariances
    Rng rng(13);
    bool all_valid = true, uniform_cancels = true, ranking_preserved = true;
    for (int trial = 0; trial < 2000; ++trial) {
      const int n = 2 + rng.uniform_int(4);
      std::vector<double> logits(n), eps(n);
      for (double& z : logits) z = rng.uniform(-50.0, 50.0);
      for (double& e : eps) e = rng.uniform(0.0, 1.0);
      const auto shaped = shape_logits(logits, eps);
      double sum = 0.0;
      for (double p : shaped) sum += p;
      if (std::fabs(sum - 1.0) > 1e-9) all_valid = false;

      const auto base = shape_logits(logits, std::vector<double>(n, 0.0));
      const auto uniform = shape_logits(logits, std::vector<double>(n, 0.37));
      for (int a = 0; a < n; ++a)
        if (std::fabs(base[a] - uniform[a]) > 1e-12) uniform_cancels = false;

      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (logits[a] > logits[b] && base[a] <= base[b]) ranking_preserved = false;
    }
    add("shaping/valid-distribution", all_valid, "2000 random (logits, eps) pairs");
    add("shaping/uniform-eps-cancels", uniform_cancels, "deviation bound 1e-12");
    add("shaping/zero-eps-preserves-ranking", ranking_preserved, "pairwise order check");
  }

  {  // sporadic reward Monte-Carlo statistics
    RewardPerturbConfig cfg;
    Rng rng(17);
    const int n = 200000;
    int triggered = 0;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = perturb_reward(0.0, cfg, rng);
      if (r != 0.0) ++triggered;
      sum += r;
    }
    const double freq = static_cast<double>(triggered) / n;
    const double mean = sum / n;
    std::ostringstream s;
    s << "frequency " << freq << ", mean bonus " << mean;
    add("sporadic-rewards/monte-carlo", std::fabs(freq - 0.5) < 0.01 && std::fabs(mean - 0.025) < 0.001,
        s.str());
  }

  {  // GAE recursion vs direct summation
    bool match = true;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      auto r = detail::random_rollout(100 + seed, 8, 2, 2, 3);
      gae_advantages(r, 0.99, 0.95);
      for (int actor = 0; actor < r.n_actors; ++actor) {
        for (int t = 0; t < r.horizon; ++t) {
          const double direct = detail::gae_direct_sum(r, actor, t, 0.99, 0.95);
          worst = std::max(worst, std::fabs(direct - r.advantages[r.index(t, actor)]));
        }
      }
    }
    if (worst > 1e-10) match = false;
    std::ostringstream s;
    s << "worst |recursive - direct| = " << worst;
    add("gae/recursion-vs-direct-sum", match, s.str());
  }

  return results;
}

}  // namespace pxrl
