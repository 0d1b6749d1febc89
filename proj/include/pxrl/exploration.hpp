#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pxrl/adam.hpp"
#include "pxrl/envs.hpp"
#include "pxrl/errors.hpp"
#include "pxrl/mlp.hpp"
#include "pxrl/rng.hpp"

namespace pxrl {

// ---------------------------------------------------------------------------
// Sporadic intrinsic rewards: random bonuses added to the extrinsic reward
// with fixed probability, independent of state novelty.
// ---------------------------------------------------------------------------

enum class BetaSchedule { kConstant, kLinearDecayToZero };

struct RewardPerturbConfig {
  double probability = 0.5;  // chance a step receives a bonus
  double beta = 1.0;         // perturbation scale
  double bonus_max = 0.1;    // bonus drawn uniform on [0, bonus_max]
  BetaSchedule schedule = BetaSchedule::kConstant;

  void validate() const {
    if (probability < 0.0 || probability > 1.0)
      throw ConfigError("reward perturbation probability must be in [0, 1]");
    if (bonus_max <= 0.0) throw ConfigError("bonus_max must be positive");
    if (beta < 0.0) throw ConfigError("beta must be nonnegative");
  }

  double effective_beta(double progress) const {
    if (schedule == BetaSchedule::kLinearDecayToZero) return beta * std::max(0.0, 1.0 - progress);
    return beta;
  }
};

// Draw nu uniform on [0,1]; the bonus triggers when nu exceeds 1 - p, which
// reproduces the nu < 0.5 / nu > 0.5 split at the default p = 0.5. The bonus
// itself is beta * eta with eta uniform on [0, bonus_max]. Perturbed rewards
// feed the learner only; logged episode returns always use the extrinsic one.
inline double perturb_reward(double reward_ext, const RewardPerturbConfig& cfg, Rng& rng,
                             double progress = 0.0) {
  const double nu = rng.uniform01();
  if (nu <= 1.0 - cfg.probability) return reward_ext;
  const double eta = rng.uniform(0.0, cfg.bonus_max);
  return reward_ext + cfg.effective_beta(progress) * eta;
}

// ---------------------------------------------------------------------------
// Pseudo-counts from an exact empirical density model.
// ---------------------------------------------------------------------------

struct DensityPair {
  double rho = 0.0;        // density before one more visit
  double rho_prime = 0.0;  // recoding density, after one more visit
};

// Exact visit-count table keyed by discretized state. The density pair uses
// the recoding denominator rho' = (N+1)/(n+1); the inversion
// N = rho(1-rho')/(rho'-rho) then recovers the integer count exactly.
// The (N+1)/n variant is kept behind a flag for comparison; it does not
// satisfy the inversion identity.
class CountModel {
 public:
  void record_visit(const StateKey& key) {
    counts_[key] += 1;
    total_ += 1;
  }

  std::int64_t count(const StateKey& key) const {
    const auto it = counts_.find(key);
    return it == counts_.end() ? 0 : it->second;
  }

  std::int64_t total() const { return total_; }
  std::size_t distinct_states() const { return counts_.size(); }

  DensityPair density_pair(const StateKey& key, bool corrected_denominator = true) const {
    if (total_ == 0) throw NumericalError("density_pair: no visits recorded, density undefined");
    const double n_visits = static_cast<double>(count(key));
    const double n = static_cast<double>(total_);
    DensityPair pair;
    pair.rho = n_visits / n;
    pair.rho_prime = corrected_denominator ? (n_visits + 1.0) / (n + 1.0) : (n_visits + 1.0) / n;
    return pair;
  }

 private:
  std::unordered_map<StateKey, std::int64_t, StateKeyHash> counts_;
  std::int64_t total_ = 0;
};

inline double pseudo_count(double rho, double rho_prime) {
  if (rho < 0.0) throw NumericalError("pseudo_count: negative density");
  if (rho_prime <= rho)
    throw NumericalError("pseudo_count: rho' must exceed rho (degenerate single-state history?)");
  return rho * (1.0 - rho_prime) / (rho_prime - rho);
}

// r_int = (N + delta)^(-1/2); delta keeps never-visited states at a large
// finite bonus instead of infinity.
inline double count_bonus(double n_visits, double delta = 0.01) {
  if (n_visits < 0.0) throw NumericalError("count_bonus: negative count");
  return 1.0 / std::sqrt(n_visits + delta);
}

// ---------------------------------------------------------------------------
// Policy shaping: multiplicative perturbation of the pre-softmax outputs.
// ---------------------------------------------------------------------------

enum class ShapeMode { kOff, kSporadic, kStructured };

struct PolicyShapeConfig {
  ShapeMode mode = ShapeMode::kOff;
  double eta_max = 0.5;            // range bound for sporadic epsilon draws
  double apply_probability = 1.0;  // fraction of steps on which shaping applies

  void validate() const {
    if (eta_max <= 0.0) throw ConfigError("eta_max must be positive");
    if (apply_probability < 0.0 || apply_probability > 1.0)
      throw ConfigError("apply_probability must be in [0, 1]");
  }
};

// Normalizes nonnegative per-action errors onto the probability simplex,
// falling back to uniform when the total has all but vanished.
inline std::vector<double> error_ratios(std::span<const double> errors) {
  double sum = 0.0;
  for (double e : errors) sum += e;
  if (sum < 1e-12) return std::vector<double>(errors.size(), 1.0 / static_cast<double>(errors.size()));
  std::vector<double> ratios(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) ratios[i] = errors[i] / sum;
  return ratios;
}

// Epsilon components drawn independently uniform on (0, eta_max).
inline std::vector<double> sporadic_epsilons(int n_actions, double eta_max, Rng& rng) {
  if (n_actions < 2) throw ConfigError("sporadic_epsilons: need at least 2 actions");
  if (eta_max <= 0.0) throw ConfigError("sporadic_epsilons: eta_max must be positive");
  std::vector<double> eps(n_actions);
  for (double& e : eps) e = rng.uniform(0.0, eta_max);
  return eps;
}

// Stages (ii)-(iv) of the shaping pipeline on strictly positive inputs:
// scale by (1 + eps), sum-normalize, softmax. Exposed separately so the
// arithmetic can be checked against hand-evaluated values.
inline std::vector<double> shape_positive_logits(std::span<const double> positive,
                                                 std::span<const double> eps) {
  if (positive.size() != eps.size()) throw UsageError("shape_logits: epsilon length mismatch");
  std::vector<double> scaled(positive.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < positive.size(); ++i) {
    scaled[i] = positive[i] * (1.0 + eps[i]);
    sum += scaled[i];
  }
  for (double& z : scaled) z /= sum;
  return softmax(scaled);
}

// Full behavior-policy pipeline: shift logits to strict positivity (the
// sum normalization is ill-defined for mixed signs), scale by (1 + eps),
// normalize, softmax. A uniform eps cancels in the normalization, so it
// reproduces the eps = 0 distribution; eps = 0 preserves the action ranking.
inline std::vector<double> shape_logits(std::span<const double> logits,
                                        std::span<const double> eps) {
  if (logits.empty()) throw ConfigError("shape_logits: empty logit vector");
  if (logits.size() != eps.size()) throw UsageError("shape_logits: epsilon length mismatch");
  const double lo = *std::min_element(logits.begin(), logits.end());
  std::vector<double> positive(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) positive[i] = logits[i] - lo + 1e-6;
  return shape_positive_logits(positive, eps);
}

// ---------------------------------------------------------------------------
// Novelty models: state-action autoencoder (structured shaping) and forward
// dynamics model (prediction-error bonus).
// ---------------------------------------------------------------------------

enum class StateEncoder { kIdentity, kRandomNetwork };

struct NoveltyConfig {
  StateEncoder encoder = StateEncoder::kIdentity;
  int random_feature_size = 8;  // output width of the frozen random encoder
  int hidden_size = 32;
  double step_size = 1e-3;
  double decay_c = 1.0;  // decay constant C of the prediction bonus
};

// Owns the autoencoder over (state features, one-hot action), the forward
// model phi(s), a -> phi(s'), the frozen random encoder when selected, and
// the global step t that decays the prediction bonus. Single writer.
class NoveltyModels {
 public:
  NoveltyModels(int observation_size, int n_actions, const NoveltyConfig& cfg, std::uint64_t seed)
      : obs_size_(observation_size), n_actions_(n_actions), cfg_(cfg) {
    if (observation_size < 1 || n_actions < 2)
      throw ConfigError("novelty models need an observation and at least 2 actions");
    if (cfg.decay_c <= 0.0) throw ConfigError("decay constant C must be positive");
    if (cfg.encoder == StateEncoder::kRandomNetwork) {
      random_encoder_ = MlpNetwork({obs_size_, cfg.hidden_size, cfg.random_feature_size},
                                   Activation::kTanh, derive_seed(seed, 1));
      feature_size_ = cfg.random_feature_size;
    } else {
      feature_size_ = obs_size_;
    }
    const int ae_size = obs_size_ + n_actions_;
    autoencoder_ = MlpNetwork({ae_size, cfg.hidden_size, ae_size}, Activation::kTanh,
                              derive_seed(seed, 2));
    forward_model_ = MlpNetwork({feature_size_ + n_actions_, cfg.hidden_size, feature_size_},
                                Activation::kTanh, derive_seed(seed, 3));
    ae_adam_ = AdamState(autoencoder_.param_count(), cfg.step_size);
    fwd_adam_ = AdamState(forward_model_.param_count(), cfg.step_size);
  }

  int n_actions() const { return n_actions_; }
  std::int64_t global_step() const { return global_step_; }
  void advance_step() { global_step_ += 1; }

  std::vector<double> encode(std::span<const double> observation) const {
    if (cfg_.encoder == StateEncoder::kIdentity)
      return {observation.begin(), observation.end()};
    return random_encoder_.forward(observation);
  }

  // e_a = || f_a(s_a) - s_a ||^2 for the concatenated state-action input.
  double encoding_error(std::span<const double> observation, int action) const {
    const std::vector<double> input = concat_state_action(observation, action);
    ForwardCache cache;
    const auto& out = autoencoder_.forward(input, cache);
    double err = 0.0;
    for (std::size_t i = 0; i < input.size(); ++i) {
      const double d = out[i] - input[i];
      err += d * d;
    }
    return err;
  }

  // One gradient step minimizing || f_a(s_a) - s_a ||^2.
  void train_autoencoder(std::span<const double> observation, int action) {
    const std::vector<double> input = concat_state_action(observation, action);
    ForwardCache cache;
    const auto& out = autoencoder_.forward(input, cache);
    std::vector<double> dout(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) dout[i] = 2.0 * (out[i] - input[i]);
    std::vector<double> grad(autoencoder_.param_count(), 0.0);
    autoencoder_.backward(cache, dout, grad);
    adam_step(autoencoder_.parameters(), grad, ae_adam_);
  }

  // Structured perturbation factors: the ratio of per-action encoding
  // errors. Always a point on the probability simplex; uniform when the
  // errors have all but vanished.
  std::vector<double> structured_epsilons(std::span<const double> observation) const {
    std::vector<double> errors(n_actions_);
    for (int a = 0; a < n_actions_; ++a) errors[a] = encoding_error(observation, a);
    return error_ratios(errors);
  }

  // Prediction-error bonus e / (t * C), then one gradient step moving the
  // forward model toward phi(s'). Call advance_step() first; t must be >= 1.
  double prediction_bonus(std::span<const double> observation, int action,
                          std::span<const double> next_observation) {
    if (global_step_ < 1)
      throw UsageError("prediction_bonus: advance_step() must run before the first bonus");
    const std::vector<double> phi_next = encode(next_observation);
    std::vector<double> input = encode(observation);
    input.resize(feature_size_ + n_actions_, 0.0);
    input[feature_size_ + action] = 1.0;

    ForwardCache cache;
    const auto& predicted = forward_model_.forward(input, cache);
    double err = 0.0;
    std::vector<double> dout(predicted.size());
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      const double d = predicted[i] - phi_next[i];
      err += d * d;
      dout[i] = 2.0 * d;
    }
    const double bonus = err / (static_cast<double>(global_step_) * cfg_.decay_c);

    std::vector<double> grad(forward_model_.param_count(), 0.0);
    forward_model_.backward(cache, dout, grad);
    adam_step(forward_model_.parameters(), grad, fwd_adam_);
    return bonus;
  }

  const MlpNetwork& autoencoder() const { return autoencoder_; }
  const MlpNetwork& forward_model() const { return forward_model_; }
  MlpNetwork& autoencoder() { return autoencoder_; }
  MlpNetwork& forward_model() { return forward_model_; }

 private:
  std::vector<double> concat_state_action(std::span<const double> observation, int action) const {
    if (static_cast<int>(observation.size()) != obs_size_)
      throw ConfigError("novelty models: observation size mismatch");
    if (action < 0 || action >= n_actions_)
      throw UsageError("novelty models: invalid action index " + std::to_string(action));
    std::vector<double> input(observation.begin(), observation.end());
    input.resize(obs_size_ + n_actions_, 0.0);
    input[obs_size_ + action] = 1.0;
    return input;
  }

  int obs_size_;
  int n_actions_;
  int feature_size_;
  NoveltyConfig cfg_;
  MlpNetwork random_encoder_;  // frozen after construction
  MlpNetwork autoencoder_;
  MlpNetwork forward_model_;
  AdamState ae_adam_;
  AdamState fwd_adam_;
  std::int64_t global_step_ = 0;
};

// ---------------------------------------------------------------------------
// Parameter-space noise (comparison baseline).
// ---------------------------------------------------------------------------

// Returns a copy with independent N(0, sigma^2) noise on every parameter.
inline MlpNetwork perturb_parameters(const MlpNetwork& net, double sigma, Rng& rng) {
  if (sigma < 0.0) throw ConfigError("perturb_parameters: sigma must be nonnegative");
  MlpNetwork copy = net;
  if (sigma == 0.0) return copy;
  for (double& p : copy.parameters()) p += sigma * rng.normal();
  return copy;
}

// ---------------------------------------------------------------------------
// Mechanism selection.
// ---------------------------------------------------------------------------

enum class ExploreKind {
  kNone,
  kSporadicRewards,
  kSporadicShaping,
  kStructuredShaping,
  kCountBonus,
  kPredictionBonus,
  kParamNoise,
};

inline std::string to_string(ExploreKind kind) {
  switch (kind) {
    case ExploreKind::kNone: return "none";
    case ExploreKind::kSporadicRewards: return "sporadic-rewards";
    case ExploreKind::kSporadicShaping: return "sporadic-shaping";
    case ExploreKind::kStructuredShaping: return "structured-shaping";
    case ExploreKind::kCountBonus: return "count-bonus";
    case ExploreKind::kPredictionBonus: return "prediction-bonus";
    case ExploreKind::kParamNoise: return "param-noise";
  }
  return "none";
}

inline ExploreKind explore_kind_from_string(const std::string& s) {
  if (s == "none") return ExploreKind::kNone;
  if (s == "sporadic-rewards") return ExploreKind::kSporadicRewards;
  if (s == "sporadic-shaping") return ExploreKind::kSporadicShaping;
  if (s == "structured-shaping") return ExploreKind::kStructuredShaping;
  if (s == "count-bonus") return ExploreKind::kCountBonus;
  if (s == "prediction-bonus") return ExploreKind::kPredictionBonus;
  if (s == "param-noise") return ExploreKind::kParamNoise;
  throw ConfigError("unknown explore.kind: " + s);
}

struct ExplorationConfig {
  ExploreKind kind = ExploreKind::kNone;
  RewardPerturbConfig reward;    // sporadic-rewards
  PolicyShapeConfig shape;       // sporadic/structured shaping
  NoveltyConfig novelty;         // structured shaping, prediction bonus
  double sigma = 0.1;            // param-noise standard deviation
  bool count_paper_denominator = false;  // rho' = (N+1)/n instead of (N+1)/(n+1)

  ShapeMode shape_mode() const {
    if (kind == ExploreKind::kSporadicShaping) return ShapeMode::kSporadic;
    if (kind == ExploreKind::kStructuredShaping) return ShapeMode::kStructured;
    return ShapeMode::kOff;
  }

  bool needs_novelty_models() const {
    return kind == ExploreKind::kStructuredShaping || kind == ExploreKind::kPredictionBonus;
  }

  void validate() const {
    reward.validate();
    shape.validate();
    if (sigma < 0.0) throw ConfigError("explore.sigma must be nonnegative");
  }
};

}  // namespace pxrl
