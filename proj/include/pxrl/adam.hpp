#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pxrl/errors.hpp"

namespace pxrl {

// Adam with bias correction. step_size is mutable so callers can anneal it
// between updates (the moment buffers are unaffected by that).
struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step_count = 0;
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  AdamState(std::size_t n_params, double step)
      : first_moment(n_params, 0.0), second_moment(n_params, 0.0), step_size(step) {
    if (step < 0.0) throw ConfigError("Adam step size must be nonnegative");
  }
};

inline void adam_step(std::vector<double>& params, const std::vector<double>& gradients,
                      AdamState& state) {
  if (params.size() != gradients.size() || params.size() != state.first_moment.size())
    throw ConfigError("adam_step: parameter/gradient/moment shape mismatch");
  for (std::size_t i = 0; i < gradients.size(); ++i) {
    if (!std::isfinite(gradients[i]))
      throw NumericalError("adam_step: non-finite gradient at coordinate " + std::to_string(i));
  }
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * gradients[i];
    v = state.beta2 * v + (1.0 - state.beta2) * gradients[i] * gradients[i];
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    params[i] -= state.step_size * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace pxrl
