#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "pxrl/errors.hpp"
#include "pxrl/rng.hpp"

namespace pxrl {

enum class Activation { kTanh, kRelu };

// Activation record produced by forward(), consumed by backward().
// act[0] is the input, act[l] the post-activation output of layer l,
// pre[l] the pre-activation of layer l. Reusable across calls.
struct ForwardCache {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> act;
};

// Dense feed-forward network with a single flat parameter vector
// (per layer: row-major weights [out x in], then biases). Hidden layers
// use the configured activation, the output layer is linear. Plain value
// type: copy freely, never mutate one instance from two threads.
class MlpNetwork {
 public:
  MlpNetwork() = default;

  MlpNetwork(std::vector<int> layer_sizes, Activation activation, std::uint64_t seed)
      : layer_sizes_(std::move(layer_sizes)), activation_(activation) {
    if (layer_sizes_.size() < 2) throw ConfigError("MlpNetwork needs at least two layer sizes");
    for (int s : layer_sizes_) {
      if (s <= 0) throw ConfigError("MlpNetwork layer sizes must be positive");
    }
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
      weight_offsets_.push_back(total);
      total += static_cast<std::size_t>(layer_sizes_[l + 1]) * layer_sizes_[l];
      bias_offsets_.push_back(total);
      total += static_cast<std::size_t>(layer_sizes_[l + 1]);
    }
    params_.assign(total, 0.0);
    init_params(seed);
  }

  int input_size() const { return layer_sizes_.front(); }
  int output_size() const { return layer_sizes_.back(); }
  int layer_count() const { return static_cast<int>(layer_sizes_.size()) - 1; }
  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  Activation activation() const { return activation_; }

  std::size_t param_count() const { return params_.size(); }
  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  std::span<double> layer_weights(int l) {
    return {params_.data() + weight_offsets_[l],
            static_cast<std::size_t>(layer_sizes_[l + 1]) * layer_sizes_[l]};
  }
  std::span<double> layer_biases(int l) {
    return {params_.data() + bias_offsets_[l], static_cast<std::size_t>(layer_sizes_[l + 1])};
  }
  std::span<const double> layer_weights(int l) const {
    return {params_.data() + weight_offsets_[l],
            static_cast<std::size_t>(layer_sizes_[l + 1]) * layer_sizes_[l]};
  }
  std::span<const double> layer_biases(int l) const {
    return {params_.data() + bias_offsets_[l], static_cast<std::size_t>(layer_sizes_[l + 1])};
  }

  // Forward pass. Returns the output (owned by the cache).
  const std::vector<double>& forward(std::span<const double> input, ForwardCache& cache) const {
    if (static_cast<int>(input.size()) != input_size())
      throw ConfigError("forward: input length " + std::to_string(input.size()) +
                        " does not match first layer size " + std::to_string(input_size()));
    const int n_layers = layer_count();
    cache.pre.resize(n_layers);
    cache.act.resize(n_layers + 1);
    cache.act[0].assign(input.begin(), input.end());

    for (int l = 0; l < n_layers; ++l) {
      const int n_in = layer_sizes_[l];
      const int n_out = layer_sizes_[l + 1];
      const double* w = params_.data() + weight_offsets_[l];
      const double* b = params_.data() + bias_offsets_[l];
      const double* x = cache.act[l].data();
      cache.pre[l].resize(n_out);
      cache.act[l + 1].resize(n_out);
      for (int i = 0; i < n_out; ++i) {
        const double* row = w + static_cast<std::size_t>(i) * n_in;
        double z = b[i];
        for (int j = 0; j < n_in; ++j) z += row[j] * x[j];
        cache.pre[l][i] = z;
        cache.act[l + 1][i] = (l == n_layers - 1) ? z : activate(z);
      }
    }
    return cache.act[n_layers];
  }

  std::vector<double> forward(std::span<const double> input) const {
    ForwardCache cache;
    return forward(input, cache);
  }

  // Backpropagates output_gradient through the cached pass, accumulating
  // parameter gradients into grad (same flat layout as parameters()).
  // grad must be zeroed by the caller if accumulation is not wanted.
  void backward(const ForwardCache& cache, std::span<const double> output_gradient,
                std::vector<double>& grad) const {
    const int n_layers = layer_count();
    if (static_cast<int>(cache.act.size()) != n_layers + 1)
      throw ConfigError("backward: cache does not match this network");
    if (static_cast<int>(output_gradient.size()) != output_size())
      throw ConfigError("backward: output gradient length mismatch");
    if (grad.size() != params_.size()) throw ConfigError("backward: gradient buffer size mismatch");

    std::vector<double> delta(output_gradient.begin(), output_gradient.end());
    std::vector<double> delta_prev;
    for (int l = n_layers - 1; l >= 0; --l) {
      const int n_in = layer_sizes_[l];
      const int n_out = layer_sizes_[l + 1];
      if (l < n_layers - 1) {
        for (int i = 0; i < n_out; ++i) delta[i] *= activate_grad(cache.pre[l][i], cache.act[l + 1][i]);
      }
      const double* x = cache.act[l].data();
      double* gw = grad.data() + weight_offsets_[l];
      double* gb = grad.data() + bias_offsets_[l];
      for (int i = 0; i < n_out; ++i) {
        double* grow = gw + static_cast<std::size_t>(i) * n_in;
        const double d = delta[i];
        for (int j = 0; j < n_in; ++j) grow[j] += d * x[j];
        gb[i] += d;
      }
      if (l > 0) {
        delta_prev.assign(n_in, 0.0);
        const double* w = params_.data() + weight_offsets_[l];
        for (int i = 0; i < n_out; ++i) {
          const double* row = w + static_cast<std::size_t>(i) * n_in;
          const double d = delta[i];
          for (int j = 0; j < n_in; ++j) delta_prev[j] += d * row[j];
        }
        delta.swap(delta_prev);
      }
    }
  }

  bool all_finite() const {
    return std::all_of(params_.begin(), params_.end(), [](double p) { return std::isfinite(p); });
  }

 private:
  void init_params(std::uint64_t seed) {
    // Uniform in +-sqrt(6/(fan_in+fan_out)), biases zero.
    Rng rng(seed);
    for (int l = 0; l < layer_count(); ++l) {
      const int n_in = layer_sizes_[l];
      const int n_out = layer_sizes_[l + 1];
      const double bound = std::sqrt(6.0 / (n_in + n_out));
      auto w = layer_weights(l);
      for (double& p : w) p = rng.uniform(-bound, bound);
      for (double& p : layer_biases(l)) p = 0.0;
    }
  }

  double activate(double z) const {
    return activation_ == Activation::kTanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
  }
  double activate_grad(double z, double a) const {
    return activation_ == Activation::kTanh ? 1.0 - a * a : (z > 0.0 ? 1.0 : 0.0);
  }

  std::vector<int> layer_sizes_;
  Activation activation_ = Activation::kTanh;
  std::vector<double> params_;
  std::vector<std::size_t> weight_offsets_;
  std::vector<std::size_t> bias_offsets_;
};

// Overflow-safe softmax (max subtraction).
inline std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw ConfigError("softmax: empty logit vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

inline std::vector<double> log_softmax(std::span<const double> logits) {
  if (logits.empty()) throw ConfigError("log_softmax: empty logit vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  const double log_sum = m + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_sum;
  return out;
}

inline double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

// Checkpoint format, little-endian:
//   "PXNN" | u32 version=1 | u32 n_sizes | u32 sizes[] | u32 activation |
//   f64 params in storage order (per layer: row-major weights, then biases)
inline void save_network(const MlpNetwork& net, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open checkpoint file for writing: " + path);
  f.write("PXNN", 4);
  auto put_u32 = [&f](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
  put_u32(1u);
  put_u32(static_cast<std::uint32_t>(net.layer_sizes().size()));
  for (int s : net.layer_sizes()) put_u32(static_cast<std::uint32_t>(s));
  put_u32(net.activation() == Activation::kTanh ? 0u : 1u);
  const auto& p = net.parameters();
  f.write(reinterpret_cast<const char*>(p.data()), static_cast<std::streamsize>(p.size() * sizeof(double)));
  if (!f) throw ConfigError("checkpoint write failed: " + path);
}

inline MlpNetwork load_network(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open checkpoint file: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::string(magic, 4) != "PXNN") throw ConfigError("bad checkpoint magic: " + path);
  auto get_u32 = [&f, &path]() {
    std::uint32_t v = 0;
    f.read(reinterpret_cast<char*>(&v), 4);
    if (!f) throw ConfigError("truncated checkpoint: " + path);
    return v;
  };
  const std::uint32_t version = get_u32();
  if (version != 1) throw ConfigError("unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t n_sizes = get_u32();
  if (n_sizes < 2 || n_sizes > 64) throw ConfigError("implausible layer count in checkpoint");
  std::vector<int> sizes(n_sizes);
  for (auto& s : sizes) s = static_cast<int>(get_u32());
  const std::uint32_t act = get_u32();
  MlpNetwork net(sizes, act == 0 ? Activation::kTanh : Activation::kRelu, 0);
  auto& p = net.parameters();
  f.read(reinterpret_cast<char*>(p.data()), static_cast<std::streamsize>(p.size() * sizeof(double)));
  if (!f) throw ConfigError("truncated checkpoint parameters: " + path);
  return net;
}

}  // namespace pxrl
