#pragma once

#include <string>
#include <vector>

#include "advrom/linalg.hpp"
#include "advrom/nn/params.hpp"
#include "advrom/rng.hpp"

namespace advrom::nn {

enum class Mode { kTrain, kInfer };

constexpr double kLeakySlope = 0.3;

// Elementwise f(x) = x for x >= 0, slope * x otherwise.
Matrix leaky_relu(const Matrix& x, double slope = kLeakySlope);
Vector leaky_relu(const Vector& x, double slope = kLeakySlope);

double sigmoid(double x);

/// Fully connected layer, y = x W^T + b with samples as rows. Backward
/// accumulates into the gradient buffers and returns the input gradient.
class DenseLayer {
 public:
  DenseLayer(Eigen::Index in_dim, Eigen::Index out_dim);

  void init_glorot(Rng& rng);

  Matrix forward(const Matrix& x, bool record = false);
  Vector forward(const Vector& x) const;
  Matrix backward(const Matrix& dy);

  void register_params(ParameterSet& set, const std::string& prefix);

  Eigen::Index in_dim() const { return w_.cols(); }
  Eigen::Index out_dim() const { return w_.rows(); }
  Matrix& weights() { return w_; }
  Vector& bias() { return b_; }
  const Matrix& weights() const { return w_; }
  const Vector& bias() const { return b_; }

 private:
  Matrix w_;  // out x in
  Vector b_;
  Matrix dw_;
  Vector db_;
  Matrix x_cache_;
  bool recorded_ = false;
};

/// Per-feature batch normalization. Train mode normalizes by batch
/// statistics (batch size >= 2) and updates running statistics with the
/// configured momentum; infer mode normalizes by the running statistics.
class BatchNormLayer {
 public:
  explicit BatchNormLayer(Eigen::Index features, double epsilon = 1e-5, double momentum = 0.99);

  Matrix forward(const Matrix& x, Mode mode, bool record = false);
  Matrix backward(const Matrix& dy);

  void register_params(ParameterSet& set, const std::string& prefix);

  Eigen::Index features() const { return gamma_.size(); }
  double epsilon() const { return epsilon_; }
  double momentum() const { return momentum_; }
  Vector& gamma() { return gamma_; }
  Vector& beta() { return beta_; }
  Vector& running_mean() { return running_mean_; }
  Vector& running_var() { return running_var_; }
  const Vector& gamma() const { return gamma_; }
  const Vector& beta() const { return beta_; }
  const Vector& running_mean() const { return running_mean_; }
  const Vector& running_var() const { return running_var_; }

 private:
  Vector gamma_, beta_, dgamma_, dbeta_;
  Vector running_mean_, running_var_;
  double epsilon_, momentum_;
  // backward cache
  Matrix xhat_;
  Vector inv_std_;
  Mode cached_mode_ = Mode::kTrain;
  bool recorded_ = false;
};

/// Inverted dropout: train mode zeroes entries with probability `rate` and
/// scales survivors by 1/(1-rate); infer mode is the identity and consumes
/// no random draws.
class DropoutLayer {
 public:
  explicit DropoutLayer(double rate);

  Matrix forward(const Matrix& x, Mode mode, Rng& rng, bool record = false);
  Matrix backward(const Matrix& dy);

  double rate() const { return rate_; }

 private:
  double rate_;
  Matrix mask_;  // holds the survivor scaling, 0 or 1/(1-rate)
  bool identity_ = true;
  bool recorded_ = false;
};

Matrix dropout_forward(const Matrix& x, double rate, Mode mode, Rng& rng);

/// Single LSTM cell applied over an input sequence; gate weights act on the
/// concatenation [x_t, h_{t-1}]. Forward returns the last hidden state;
/// backward runs truncated BPTT over the recorded sequence and returns the
/// per-step input gradients.
class LSTMLayer {
 public:
  LSTMLayer(Eigen::Index input_dim, Eigen::Index hidden_dim);

  void init_glorot(Rng& rng);  // forget-gate bias 1, other biases 0

  Matrix forward(const std::vector<Matrix>& xs, bool record = false);
  std::vector<Matrix> backward(const Matrix& dh_last);

  void register_params(ParameterSet& set, const std::string& prefix);

  Eigen::Index input_dim() const { return input_dim_; }
  Eigen::Index hidden_dim() const { return hidden_dim_; }

  // Gate order everywhere: input, forget, output, candidate.
  Matrix& gate_weights(int gate) { return w_[gate]; }
  Vector& gate_bias(int gate) { return b_[gate]; }
  const Matrix& gate_weights(int gate) const { return w_[gate]; }
  const Vector& gate_bias(int gate) const { return b_[gate]; }

 private:
  Eigen::Index input_dim_, hidden_dim_;
  Matrix w_[4];  // hidden x (input + hidden)
  Vector b_[4];
  Matrix dw_[4];
  Vector db_[4];

  struct StepCache {
    Matrix concat;  // [x_t, h_{t-1}]
    Matrix gate_i, gate_f, gate_o, gate_g;
    Matrix c_prev, c, tanh_c;
  };
  std::vector<StepCache> cache_;
  bool recorded_ = false;
};

/// One LSTM cell step on single vectors; the gate math the sequence forward
/// is built from.
std::pair<Vector, Vector> lstm_step(const LSTMLayer& layer, const Vector& x, const Vector& h,
                                    const Vector& c);

}  // namespace advrom::nn
