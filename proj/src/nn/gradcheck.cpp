#include "advrom/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace advrom::nn {

GradCheckResult gradient_check(ParameterSet& params, const std::function<double()>& forward_loss,
                               const std::function<void()>& compute_grads, double step) {
  compute_grads();
  const Vector analytic = params.flatten_grads();

  GradCheckResult result;
  Eigen::Index flat = 0;
  for (const ParamBlock& block : params.blocks()) {
    for (Eigen::Index i = 0; i < block.size; ++i, ++flat) {
      const double saved = block.value[i];
      const double h = step * std::max(1.0, std::abs(saved));
      block.value[i] = saved + h;
      const double loss_plus = forward_loss();
      block.value[i] = saved - h;
      const double loss_minus = forward_loss();
      block.value[i] = saved;

      const double numeric = (loss_plus - loss_minus) / (2.0 * h);
      const double an = analytic(flat);
      const double rel =
          std::abs(numeric - an) / std::max({std::abs(numeric), std::abs(an), 1e-8});
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_block = block.name;
        result.worst_index = i;
        result.worst_analytic = an;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace advrom::nn
