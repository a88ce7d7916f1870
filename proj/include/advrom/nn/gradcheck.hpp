#pragma once

#include <functional>
#include <string>

#include "advrom/nn/params.hpp"

namespace advrom::nn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_block;
  Eigen::Index worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Central finite differences against hand-written gradients.
///
/// `forward_loss` must be a pure function of the current parameter values
/// (fix all random draws inside it). `compute_grads` zeroes the gradient
/// buffers and runs a recorded forward plus backward. The per-parameter step
/// is `step * max(1, |value|)`; the relative error is
/// |g_fd - g_an| / max(|g_fd|, |g_an|, 1e-8).
GradCheckResult gradient_check(ParameterSet& params, const std::function<double()>& forward_loss,
                               const std::function<void()>& compute_grads, double step = 1e-5);

}  // namespace advrom::nn
