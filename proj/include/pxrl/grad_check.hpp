#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "pxrl/mlp.hpp"

namespace pxrl {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  bool pass = false;
};

// Compares an analytic gradient against central finite differences of a
// deterministic scalar loss, coordinate by coordinate. The relative error
// denominator is floored so coordinates with near-zero gradient are judged
// on absolute error at the floor scale.
inline GradCheckReport finite_diff_check(const MlpNetwork& net,
                                         const std::function<double(const MlpNetwork&)>& loss_fn,
                                         const std::vector<double>& analytic_grad,
                                         double tolerance, double h = 1e-5,
                                         double denom_floor = 1e-3) {
  if (analytic_grad.size() != net.param_count())
    throw ConfigError("finite_diff_check: gradient size does not match parameter count");
  MlpNetwork probe = net;
  auto& params = probe.parameters();
  GradCheckReport report;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = loss_fn(probe);
    params[i] = saved - h;
    const double down = loss_fn(probe);
    params[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double a = analytic_grad[i];
    const double denom = std::max({std::fabs(a), std::fabs(fd), denom_floor});
    const double rel = std::fabs(a - fd) / denom;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
    }
  }
  report.pass = report.max_rel_error <= tolerance;
  return report;
}

}  // namespace pxrl
