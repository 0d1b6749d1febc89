#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "pxrl/adam.hpp"
#include "pxrl/envs.hpp"
#include "pxrl/errors.hpp"
#include "pxrl/exploration.hpp"
#include "pxrl/mlp.hpp"
#include "pxrl/rollout.hpp"

namespace pxrl {

// Table-2 PPO defaults. alpha (linear anneal 1 -> 0 over total steps)
// scales both the Adam step size and the clip range.
struct PpoConfig {
  int horizon = 128;
  double step_size = 2.5e-4;
  int epochs = 4;
  int minibatches = 4;
  double gamma = 0.99;
  double lambda = 0.95;
  int n_actors = 8;
  double clip = 0.1;
  double value_coeff = 0.5;
  double entropy_coeff = 0.01;
  bool anneal = true;

  void validate() const {
    if (horizon < 1 || epochs < 1 || minibatches < 1 || n_actors < 1)
      throw ConfigError("ppo: horizon/epochs/minibatches/actors must be positive");
    if (step_size < 0 || clip < 0 || gamma < 0 || gamma > 1 || lambda < 0 || lambda > 1)
      throw ConfigError("ppo: step size, clip, gamma, lambda out of range");
  }
};

// A2C with n-step returns (bootstrapped) and entropy regularization.
struct A2cConfig {
  int horizon = 8;  // n-step window
  double gamma = 0.99;
  double step_size = 7e-4;
  double value_coeff = 0.5;
  double entropy_coeff = 0.01;
  int n_actors = 8;
  bool anneal = false;

  void validate() const {
    if (horizon < 1 || n_actors < 1) throw ConfigError("a2c: horizon/actors must be positive");
    if (step_size < 0 || gamma < 0 || gamma > 1)
      throw ConfigError("a2c: step size or gamma out of range");
  }
};

enum class AgentKind { kPpo, kA2c };

inline AgentKind agent_kind_from_string(const std::string& s) {
  if (s == "ppo") return AgentKind::kPpo;
  if (s == "a2c") return AgentKind::kA2c;
  throw ConfigError("unknown agent kind: " + s + " (want ppo or a2c)");
}

struct AgentSettings {
  AgentKind kind = AgentKind::kPpo;
  PpoConfig ppo;
  A2cConfig a2c;
  std::vector<int> hidden = {64, 64};

  int horizon() const { return kind == AgentKind::kPpo ? ppo.horizon : a2c.horizon; }
  int n_actors() const { return kind == AgentKind::kPpo ? ppo.n_actors : a2c.n_actors; }
  double gamma() const { return kind == AgentKind::kPpo ? ppo.gamma : a2c.gamma; }
  double lambda() const { return kind == AgentKind::kPpo ? ppo.lambda : 1.0; }
  void validate() const {
    if (hidden.empty()) throw ConfigError("agent: need at least one hidden layer");
    ppo.validate();
    a2c.validate();
  }
};

// ---------------------------------------------------------------------------
// Acting
// ---------------------------------------------------------------------------

struct ActResult {
  int action = 0;
  double behavior_logp = 0.0;
  double value = 0.0;
  std::vector<double> epsilons;  // the recorded eps draw; empty when unshaped
};

struct ActScratch {
  ForwardCache policy_cache;
  ForwardCache value_cache;
};

// One action selection through the shaping pipeline: compute logits f(s),
// obtain eps per the shaping mode, sample from pi_b = shape_logits(f(s), eps),
// and return log pi_b of the taken action as the behavior log-probability.
// With deterministic set, returns the argmax of the raw logits.
inline ActResult act(const MlpNetwork& policy_net, const MlpNetwork& value_net,
                     std::span<const double> observation, const PolicyShapeConfig& shape_cfg,
                     const NoveltyModels* models, Rng& rng, bool deterministic = false,
                     ActScratch* scratch = nullptr) {
  ActScratch local;
  ActScratch& s = scratch ? *scratch : local;
  const auto& logits = policy_net.forward(observation, s.policy_cache);

  ActResult result;
  result.value = value_net.forward(observation, s.value_cache)[0];

  if (deterministic) {
    result.action = static_cast<int>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    result.behavior_logp = log_softmax(logits)[result.action];
    return result;
  }

  bool shaped = shape_cfg.mode != ShapeMode::kOff;
  if (shaped && shape_cfg.apply_probability < 1.0)
    shaped = rng.uniform01() < shape_cfg.apply_probability;

  std::vector<double> dist;
  if (shaped) {
    if (shape_cfg.mode == ShapeMode::kSporadic) {
      result.epsilons = sporadic_epsilons(static_cast<int>(logits.size()), shape_cfg.eta_max, rng);
    } else {
      if (models == nullptr)
        throw ConfigError("structured shaping requires novelty models");
      result.epsilons = models->structured_epsilons(observation);
    }
    dist = shape_logits(logits, result.epsilons);
  } else {
    dist = softmax(logits);
  }

  const double u = rng.uniform01();
  double acc = 0.0;
  int action = static_cast<int>(dist.size()) - 1;
  for (std::size_t a = 0; a < dist.size(); ++a) {
    acc += dist[a];
    if (u < acc) {
      action = static_cast<int>(a);
      break;
    }
  }
  result.action = action;
  result.behavior_logp = std::log(std::max(dist[action], 1e-300));
  return result;
}

// ---------------------------------------------------------------------------
// Losses and updates
// ---------------------------------------------------------------------------

struct LossStats {
  double total = 0.0;
  double policy_term = 0.0;
  double value_term = 0.0;
  double entropy = 0.0;
  double effective_step_size = 0.0;
  double effective_clip = 0.0;
};

struct LossGradients {
  double total = 0.0;
  double policy_term = 0.0;
  double value_term = 0.0;
  double entropy = 0.0;
  std::vector<double> policy_grad;
  std::vector<double> value_grad;
};

namespace detail {

using LossGrad = LossGradients;

// Shared PPO / A2C loss evaluation on a set of rollout rows.
//   PPO:  -mean(min(ratio*A, clip(ratio)*A)) + c_v*mean((V-R)^2) - c_e*mean(H)
//   A2C:  -mean(logp_a*A)                    + c_v*mean((V-R)^2) - c_e*mean(H)
// `advantages` must be indexed like the rollout (already normalized for PPO).
// Gradients follow the autodiff convention for the clipped min: the selected
// branch's derivative, zero once the clipped branch is active out of range.
inline LossGrad policy_value_loss(const MlpNetwork& policy, const MlpNetwork& value,
                                  const Rollout& rollout, std::span<const std::size_t> indices,
                                  std::span<const double> advantages, bool clipped_surrogate,
                                  double clip, double value_coeff, double entropy_coeff,
                                  bool want_grad) {
  LossGrad out;
  if (want_grad) {
    out.policy_grad.assign(policy.param_count(), 0.0);
    out.value_grad.assign(value.param_count(), 0.0);
  }
  const double inv_n = 1.0 / static_cast<double>(indices.size());
  ForwardCache pcache, vcache;
  std::vector<double> dlogits, dvalue(1);
  for (const std::size_t i : indices) {
    const std::span<const double> obs(rollout.observation(i), rollout.obs_size);
    const auto& logits = policy.forward(obs, pcache);
    const std::vector<double> logp = log_softmax(logits);
    const std::vector<double> probs = softmax(logits);
    const int a = rollout.actions[i];
    const double adv = advantages[i];
    const double h = entropy(probs);
    out.entropy += h * inv_n;

    double dl_dlogp = 0.0;  // d(policy term)/d(logp_a), pre mean
    if (clipped_surrogate) {
      const double ratio = std::exp(logp[a] - rollout.behavior_logp[i]);
      const double unclipped = ratio * adv;
      const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv;
      out.policy_term += -std::min(unclipped, clipped) * inv_n;
      const bool take_unclipped = unclipped <= clipped;  // min picks the smaller objective
      const bool in_range = ratio >= 1.0 - clip && ratio <= 1.0 + clip;
      if (take_unclipped || in_range) dl_dlogp = -adv * ratio;
    } else {
      out.policy_term += -logp[a] * adv * inv_n;
      dl_dlogp = -adv;
    }

    const double v = value.forward(obs, vcache)[0];
    const double verr = v - rollout.returns[i];
    out.value_term += verr * verr * inv_n;

    if (want_grad) {
      dlogits.assign(logits.size(), 0.0);
      for (std::size_t k = 0; k < logits.size(); ++k) {
        // d(logp_a)/dz_k = [k==a] - p_k;  dH/dz_k = -p_k (logp_k + H)
        dlogits[k] = dl_dlogp * ((static_cast<int>(k) == a ? 1.0 : 0.0) - probs[k]) +
                     entropy_coeff * probs[k] * (logp[k] + h);
        dlogits[k] *= inv_n;
      }
      policy.backward(pcache, dlogits, out.policy_grad);
      dvalue[0] = value_coeff * 2.0 * verr * inv_n;
      value.backward(vcache, dvalue, out.value_grad);
    }
  }
  out.total = out.policy_term + value_coeff * out.value_term - entropy_coeff * out.entropy;
  if (!std::isfinite(out.total))
    throw NumericalError("policy/value loss is not finite (policy=" + std::to_string(out.policy_term) +
                         " value=" + std::to_string(out.value_term) + ")");
  return out;
}

}  // namespace detail

// Full PPO training loss (clipped surrogate + value + entropy terms) and its
// exact gradients on the selected rollout rows. `advantages` are the
// already-normalized values to weight the surrogate with.
inline LossGradients ppo_loss(const MlpNetwork& policy_net, const MlpNetwork& value_net,
                              const Rollout& rollout, std::span<const std::size_t> indices,
                              std::span<const double> advantages, const PpoConfig& cfg,
                              double alpha, bool want_grad = true) {
  return detail::policy_value_loss(policy_net, value_net, rollout, indices, advantages,
                                   /*clipped_surrogate=*/true, cfg.clip * alpha, cfg.value_coeff,
                                   cfg.entropy_coeff, want_grad);
}

// Full A2C training loss and gradients.
inline LossGradients a2c_loss(const MlpNetwork& policy_net, const MlpNetwork& value_net,
                              const Rollout& rollout, std::span<const std::size_t> indices,
                              const A2cConfig& cfg, bool want_grad = true) {
  return detail::policy_value_loss(policy_net, value_net, rollout, indices, rollout.advantages,
                                   /*clipped_surrogate=*/false, 0.0, cfg.value_coeff,
                                   cfg.entropy_coeff, want_grad);
}

// Clipped-surrogate PPO update: per epoch the batch is reshuffled and split
// into cfg.minibatches slices, with one Adam step on each. Advantages are
// normalized once per update (mean 0, std 1). alpha scales the step size and
// the clip range together.
inline LossStats ppo_update(MlpNetwork& policy_net, MlpNetwork& value_net,
                            AdamState& policy_adam, AdamState& value_adam, const Rollout& rollout,
                            const PpoConfig& cfg, double alpha, Rng& shuffle_rng) {
  std::vector<double> norm_adv = rollout.advantages;
  normalize_advantages(norm_adv);

  const double eff_step = cfg.step_size * alpha;
  const double eff_clip = cfg.clip * alpha;
  policy_adam.step_size = eff_step;
  value_adam.step_size = eff_step;

  std::vector<std::size_t> order(rollout.size());
  std::iota(order.begin(), order.end(), 0);

  LossStats stats;
  stats.effective_step_size = eff_step;
  stats.effective_clip = eff_clip;
  int n_steps = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(static_cast<int>(i))]);
    const std::size_t n = order.size();
    for (int mb = 0; mb < cfg.minibatches; ++mb) {
      const std::size_t lo = n * mb / cfg.minibatches;
      const std::size_t hi = n * (mb + 1) / cfg.minibatches;
      if (lo == hi) continue;
      const std::span<const std::size_t> slice(order.data() + lo, hi - lo);
      auto lg = ppo_loss(policy_net, value_net, rollout, slice, norm_adv, cfg, alpha);
      adam_step(policy_net.parameters(), lg.policy_grad, policy_adam);
      adam_step(value_net.parameters(), lg.value_grad, value_adam);
      stats.total += lg.total;
      stats.policy_term += lg.policy_term;
      stats.value_term += lg.value_term;
      stats.entropy += lg.entropy;
      n_steps += 1;
    }
  }
  if (n_steps > 0) {
    stats.total /= n_steps;
    stats.policy_term /= n_steps;
    stats.value_term /= n_steps;
    stats.entropy /= n_steps;
  }
  return stats;
}

// Single-step A2C update on the whole rollout:
//   loss = -mean(logp_a * A) + c_v * mean((R - V)^2) - c_e * mean(H)
inline LossStats a2c_update(MlpNetwork& policy_net, MlpNetwork& value_net, AdamState& policy_adam,
                            AdamState& value_adam, const Rollout& rollout, const A2cConfig& cfg,
                            double alpha) {
  std::vector<std::size_t> indices(rollout.size());
  std::iota(indices.begin(), indices.end(), 0);
  const double eff_step = cfg.step_size * alpha;
  policy_adam.step_size = eff_step;
  value_adam.step_size = eff_step;
  auto lg = a2c_loss(policy_net, value_net, rollout, indices, cfg);
  adam_step(policy_net.parameters(), lg.policy_grad, policy_adam);
  adam_step(value_net.parameters(), lg.value_grad, value_adam);
  LossStats stats;
  stats.total = lg.total;
  stats.policy_term = lg.policy_term;
  stats.value_term = lg.value_term;
  stats.entropy = lg.entropy;
  stats.effective_step_size = eff_step;
  return stats;
}

// ---------------------------------------------------------------------------
// Rollout collection and the per-seed training loop
// ---------------------------------------------------------------------------

struct EpisodeStats {
  std::int64_t episode_index = 0;
  std::int64_t global_step = 0;  // at episode end
  double return_ext = 0.0;
  double return_learn = 0.0;
  int length = 0;
};

using EpisodeSink = std::function<void(const EpisodeStats&)>;
using EnvFactory = std::function<std::unique_ptr<Env>()>;

// Runs one seed of training: owns the actor environments, the policy and
// value networks, the exploration state (count model / novelty models), and
// all random streams, every one derived deterministically from the run seed.
class Trainer {
 public:
  Trainer(const EnvFactory& env_factory, const AgentSettings& agent,
          const ExplorationConfig& explore, std::int64_t total_steps, std::uint64_t seed)
      : env_factory_(env_factory),
        agent_(agent),
        explore_(explore),
        total_steps_(total_steps),
        seed_(seed),
        action_rng_(derive_seed(seed, 104)),
        explore_rng_(derive_seed(seed, 105)),
        shuffle_rng_(derive_seed(seed, 106)) {
    agent_.validate();
    explore_.validate();
    if (total_steps_ < agent_.horizon())
      throw ConfigError("total_steps must be at least one horizon");

    auto probe = env_factory_();
    const int obs_size = probe->observation_size();
    const int n_actions = probe->action_count();
    if (n_actions < 2) throw ConfigError("agents need at least 2 actions");

    std::vector<int> policy_sizes{obs_size};
    policy_sizes.insert(policy_sizes.end(), agent_.hidden.begin(), agent_.hidden.end());
    policy_sizes.push_back(n_actions);
    std::vector<int> value_sizes{obs_size};
    value_sizes.insert(value_sizes.end(), agent_.hidden.begin(), agent_.hidden.end());
    value_sizes.push_back(1);
    policy_ = MlpNetwork(policy_sizes, Activation::kTanh, derive_seed(seed, 101));
    value_ = MlpNetwork(value_sizes, Activation::kTanh, derive_seed(seed, 102));
    policy_adam_ = AdamState(policy_.param_count(), step_size());
    value_adam_ = AdamState(value_.param_count(), step_size());

    if (explore_.needs_novelty_models())
      novelty_ = std::make_unique<NoveltyModels>(obs_size, n_actions, explore_.novelty,
                                                 derive_seed(seed, 103));

    actors_.reserve(agent_.n_actors());
    for (int k = 0; k < agent_.n_actors(); ++k) {
      ActorState actor;
      actor.env = k == 0 ? std::move(probe) : env_factory_();
      actor.index = k;
      actor.observation = actor.env->reset(episode_seed(k, 0));
      actors_.push_back(std::move(actor));
      record_initial_visit(actors_.back());
    }
    rollout_.resize(agent_.horizon(), agent_.n_actors(), obs_size, n_actions,
                    explore_.shape_mode() != ShapeMode::kOff);
  }

  const MlpNetwork& policy() const { return policy_; }
  const MlpNetwork& value_network() const { return value_; }
  const CountModel& counts() const { return counts_; }
  const NoveltyModels* novelty() const { return novelty_.get(); }
  std::int64_t global_step() const { return global_step_; }
  std::int64_t total_steps() const { return total_steps_; }
  std::int64_t episode_count() const { return episode_counter_; }

  void set_episode_sink(EpisodeSink sink) { sink_ = std::move(sink); }

  // alpha = 1 - progress, reaching 0 exactly at the final step
  double anneal_factor() const {
    const bool anneal = agent_.kind == AgentKind::kPpo ? agent_.ppo.anneal : agent_.a2c.anneal;
    if (!anneal) return 1.0;
    const double progress =
        static_cast<double>(std::min(global_step_, total_steps_)) / static_cast<double>(total_steps_);
    return 1.0 - progress;
  }

  // Steps every actor `horizon` times; the learner reward picks up whatever
  // bonus the configured mechanism produces while the extrinsic reward is
  // recorded untouched.
  const Rollout& collect_rollout() {
    const int T = agent_.horizon();
    if (explore_.kind == ExploreKind::kParamNoise)
      behavior_policy_ = perturb_parameters(policy_, explore_.sigma, explore_rng_);
    const MlpNetwork& acting_policy =
        explore_.kind == ExploreKind::kParamNoise ? behavior_policy_ : policy_;

    PolicyShapeConfig shape_cfg = explore_.shape;
    shape_cfg.mode = explore_.shape_mode();

    const double progress =
        static_cast<double>(global_step_) / static_cast<double>(total_steps_);

    for (int t = 0; t < T; ++t) {
      for (auto& actor : actors_) {
        const std::size_t i = rollout_.index(t, actor.index);
        std::copy(actor.observation.begin(), actor.observation.end(),
                  rollout_.observations.begin() + i * rollout_.obs_size);

        const ActResult choice = act(acting_policy, value_, actor.observation, shape_cfg,
                                     novelty_.get(), action_rng_, false, &scratch_);
        if (explore_.kind == ExploreKind::kStructuredShaping)
          novelty_->train_autoencoder(actor.observation, choice.action);

        StepResult step = actor.env->step(choice.action);
        global_step_ += 1;

        rollout_.actions[i] = choice.action;
        rollout_.behavior_logp[i] = choice.behavior_logp;
        rollout_.values[i] = choice.value;
        rollout_.reward_ext[i] = step.reward_ext;
        rollout_.reward_learn[i] = learner_reward(*actor.env, step.reward_ext, actor.observation,
                                                  choice.action, step.observation, progress);
        rollout_.terminated[i] = step.terminated ? 1 : 0;
        rollout_.truncated[i] = step.truncated ? 1 : 0;
        if (!rollout_.epsilons.empty()) {
          auto* dst = rollout_.epsilons.data() + i * rollout_.n_actions;
          std::fill(dst, dst + rollout_.n_actions, 0.0);
          if (!choice.epsilons.empty())
            std::copy(choice.epsilons.begin(), choice.epsilons.end(), dst);
        }

        actor.return_ext += step.reward_ext;
        actor.return_learn += rollout_.reward_learn[i];
        actor.length += 1;

        if (step.terminated || step.truncated) {
          rollout_.next_values[i] = value_.forward(step.observation, scratch_.value_cache)[0];
          finish_episode(actor);
        } else {
          actor.observation = std::move(step.observation);
        }
      }
    }
    for (auto& actor : actors_) {
      const std::size_t last = rollout_.index(T - 1, actor.index);
      if (!rollout_.terminated[last] && !rollout_.truncated[last])
        rollout_.next_values[last] = value_.forward(actor.observation, scratch_.value_cache)[0];
    }
    gae_advantages(rollout_, agent_.gamma(), agent_.lambda());
    return rollout_;
  }

  LossStats update(const Rollout& rollout) {
    const double alpha = anneal_factor();
    if (agent_.kind == AgentKind::kPpo)
      return ppo_update(policy_, value_, policy_adam_, value_adam_, rollout, agent_.ppo, alpha,
                        shuffle_rng_);
    return a2c_update(policy_, value_, policy_adam_, value_adam_, rollout, agent_.a2c, alpha);
  }

  // One collect + update cycle. Returns false once total_steps is reached.
  bool iterate() {
    if (global_step_ >= total_steps_) return false;
    const Rollout& rollout = collect_rollout();
    last_stats_ = update(rollout);
    return global_step_ < total_steps_;
  }

  void run() {
    while (iterate()) {
    }
  }

  const LossStats& last_stats() const { return last_stats_; }

  // Deterministic greedy episode on a fresh environment; extrinsic return.
  double eval_episode(std::uint64_t eval_seed, int step_cap = 100000) {
    auto env = env_factory_();
    std::vector<double> obs = env->reset(eval_seed);
    Rng dummy(0);
    double ret = 0.0;
    for (int t = 0; t < step_cap; ++t) {
      const ActResult choice =
          act(policy_, value_, obs, PolicyShapeConfig{}, nullptr, dummy, true, &scratch_);
      StepResult step = env->step(choice.action);
      ret += step.reward_ext;
      if (step.terminated || step.truncated) break;
      obs = std::move(step.observation);
    }
    return ret;
  }

 private:
  struct ActorState {
    std::unique_ptr<Env> env;
    int index = 0;
    std::vector<double> observation;
    std::int64_t episodes_done = 0;
    double return_ext = 0.0;
    double return_learn = 0.0;
    int length = 0;
  };

  double step_size() const {
    return agent_.kind == AgentKind::kPpo ? agent_.ppo.step_size : agent_.a2c.step_size;
  }

  std::uint64_t episode_seed(int actor, std::int64_t episode) const {
    return derive_seed(derive_seed(seed_, 200 + static_cast<std::uint64_t>(actor)),
                       static_cast<std::uint64_t>(episode));
  }

  void record_initial_visit(ActorState& actor) {
    if (explore_.kind == ExploreKind::kCountBonus)
      counts_.record_visit(actor.env->discretize(actor.observation));
  }

  double learner_reward(const Env& env, double reward_ext, std::span<const double> obs, int action,
                        std::span<const double> next_obs, double progress) {
    switch (explore_.kind) {
      case ExploreKind::kSporadicRewards:
        return perturb_reward(reward_ext, explore_.reward, explore_rng_, progress);
      case ExploreKind::kCountBonus: {
        const StateKey key = env.discretize(next_obs);
        counts_.record_visit(key);
        const double bonus = count_bonus(static_cast<double>(counts_.count(key)));
        return reward_ext + explore_.reward.effective_beta(progress) * bonus;
      }
      case ExploreKind::kPredictionBonus: {
        novelty_->advance_step();
        const double bonus = novelty_->prediction_bonus(obs, action, next_obs);
        return reward_ext + explore_.reward.effective_beta(progress) * bonus;
      }
      default:
        return reward_ext;
    }
  }

  void finish_episode(ActorState& actor) {
    if (sink_) {
      EpisodeStats stats;
      stats.episode_index = episode_counter_;
      stats.global_step = global_step_;
      stats.return_ext = actor.return_ext;
      stats.return_learn = actor.return_learn;
      stats.length = actor.length;
      sink_(stats);
    }
    episode_counter_ += 1;
    actor.episodes_done += 1;
    actor.return_ext = 0.0;
    actor.return_learn = 0.0;
    actor.length = 0;
    actor.observation = actor.env->reset(episode_seed(actor.index, actor.episodes_done));
    record_initial_visit(actor);
  }

  EnvFactory env_factory_;
  AgentSettings agent_;
  ExplorationConfig explore_;
  std::int64_t total_steps_;
  std::uint64_t seed_;

  MlpNetwork policy_;
  MlpNetwork value_;
  MlpNetwork behavior_policy_;  // param-noise copy, resampled per rollout
  AdamState policy_adam_;
  AdamState value_adam_;
  CountModel counts_;
  std::unique_ptr<NoveltyModels> novelty_;

  std::vector<ActorState> actors_;
  Rollout rollout_;
  ActScratch scratch_;
  Rng action_rng_;
  Rng explore_rng_;
  Rng shuffle_rng_;

  std::int64_t global_step_ = 0;
  std::int64_t episode_counter_ = 0;
  EpisodeSink sink_;
  LossStats last_stats_;
};

}  // namespace pxrl
