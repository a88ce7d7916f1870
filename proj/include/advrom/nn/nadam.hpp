#pragma once

#include <cstdint>

#include "advrom/linalg.hpp"
#include "advrom/nn/params.hpp"

namespace advrom::nn {

struct NadamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam-with-Nesterov-momentum state over a flat parameter vector.
struct NadamState {
  NadamConfig cfg;
  Vector m;  // first moment
  Vector v;  // second moment, componentwise >= 0
  std::uint64_t t = 0;

  explicit NadamState(NadamConfig config = {}, Eigen::Index size = 0)
      : cfg(config), m(Vector::Zero(size)), v(Vector::Zero(size)) {}
};

/// One Nadam update on a flat parameter vector. Increments state.t, then:
///   m <- b1 m + (1-b1) g
///   v <- b2 v + (1-b2) g^2
///   lookahead = b1 * m/(1-b1^(t+1)) + (1-b1) * g/(1-b1^t)
///   theta <- theta - lr * lookahead / (sqrt(v/(1-b2^t)) + eps)
void nadam_step(Eigen::Ref<Vector> params, const Vector& grads, NadamState& state);

/// Block-aware wrapper driving nadam_step over a ParameterSet's flat view.
/// Rejects non-finite gradients with the offending block's name.
class NadamOptimizer {
 public:
  NadamOptimizer(NadamConfig cfg, const ParameterSet& params);

  void step(ParameterSet& params);

  const NadamState& state() const { return state_; }
  NadamState& state() { return state_; }

 private:
  NadamState state_;
};

}  // namespace advrom::nn
