#include "advrom/nn/nadam.hpp"

#include <cmath>

#include "advrom/errors.hpp"

namespace advrom::nn {

void nadam_step(Eigen::Ref<Vector> params, const Vector& grads, NadamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ArgumentError("nadam step size mismatch");
  }
  state.t += 1;
  const double b1 = state.cfg.beta1;
  const double b2 = state.cfg.beta2;
  const auto t = static_cast<double>(state.t);

  state.m = b1 * state.m + (1.0 - b1) * grads;
  state.v = b2 * state.v.array() + (1.0 - b2) * grads.array().square();

  const double m_corr = 1.0 - std::pow(b1, t + 1.0);
  const double g_corr = 1.0 - std::pow(b1, t);
  const double v_corr = 1.0 - std::pow(b2, t);

  const Vector lookahead = (b1 / m_corr) * state.m + ((1.0 - b1) / g_corr) * grads;
  const Vector denom = (state.v.array() / v_corr).sqrt() + state.cfg.epsilon;
  params.array() -= state.cfg.learning_rate * lookahead.array() / denom.array();
}

NadamOptimizer::NadamOptimizer(NadamConfig cfg, const ParameterSet& params)
    : state_(cfg, params.total_size()) {}

void NadamOptimizer::step(ParameterSet& params) {
  if (params.total_size() != state_.m.size()) {
    throw ArgumentError("optimizer bound to a parameter set of different size");
  }
  for (const ParamBlock& block : params.blocks()) {
    for (Eigen::Index i = 0; i < block.size; ++i) {
      if (!std::isfinite(block.grad[i])) {
        throw NumericError("non-finite gradient in parameter block \"" + block.name + "\"");
      }
    }
  }
  Vector values = params.flatten_values();
  const Vector grads = params.flatten_grads();
  nadam_step(values, grads, state_);
  params.assign_values(values);
}

}  // namespace advrom::nn
