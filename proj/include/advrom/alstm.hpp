#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "advrom/linalg.hpp"
#include "advrom/nn/layers.hpp"
#include "advrom/nn/nadam.hpp"

namespace advrom {

/// Time-ordered latent vectors, one row per step.
struct LatentSeries {
  Matrix values;  // T x latent

  Eigen::Index length() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

enum class ForecasterMode { kAdversarial, kClassic };
enum class DiscInput { kContextConditioned, kDeltaOnly };

std::string to_string(ForecasterMode mode);
ForecasterMode forecaster_mode_from_string(const std::string& s);

struct ForecasterConfig {
  Eigen::Index latent_dim = 8;
  Eigen::Index time_lag = 5;   // window length N
  Eigen::Index hidden_dim = 64;
  ForecasterMode mode = ForecasterMode::kAdversarial;
  DiscInput disc_input = DiscInput::kContextConditioned;
  Eigen::Index batch_size = 32;
  Eigen::Index epochs = 500;
  std::uint64_t seed = 0;
  double lambda_rec = 1.0;
  double train_fraction = 0.8;  // leading windows train, trailing validate
  double dropout_rate = 0.5;
  nn::NadamConfig optimizer;

  void validate() const;
};

/// Sliding windows of N consecutive latents with the next-step delta as the
/// target: window k covers series rows [k, k+N), its target is
/// z[k+N] - z[k+N-1]. Count is T - N. Immutable after construction.
class WindowSet {
 public:
  WindowSet(const LatentSeries& series, Eigen::Index time_lag);

  Eigen::Index count() const { return targets_.rows(); }
  Eigen::Index time_lag() const { return time_lag_; }
  Eigen::Index latent_dim() const { return series_.cols(); }

  Matrix window(Eigen::Index k) const;           // N x latent
  Vector target(Eigen::Index k) const;           // the true delta
  Vector window_last(Eigen::Index k) const;      // z at the window end
  const Matrix& targets() const { return targets_; }
  const Matrix& series() const { return series_; }

  // Batched views for training: step t of the result holds row t of every
  // selected window.
  std::vector<Matrix> gather_steps(const std::vector<Eigen::Index>& which) const;
  Matrix gather_targets(const std::vector<Eigen::Index>& which) const;
  Matrix gather_last(const std::vector<Eigen::Index>& which) const;

 private:
  Matrix series_;
  Matrix targets_;
  Eigen::Index time_lag_;
};

WindowSet make_windows(const LatentSeries& series, Eigen::Index time_lag);

/// Latent-delta generator: LSTM over the window, batch norm on the last
/// hidden state, dropout, then a linear head to one delta per window.
class ForecasterModel {
 public:
  ForecasterModel(Eigen::Index latent_dim, Eigen::Index hidden_dim, Eigen::Index time_lag,
                  double dropout_rate, std::uint64_t init_seed);

  Eigen::Index latent_dim() const { return latent_dim_; }
  Eigen::Index hidden_dim() const { return hidden_dim_; }
  Eigen::Index time_lag() const { return time_lag_; }
  double dropout_rate() const { return dropout_rate_; }

  /// Batched forward; xs holds time_lag matrices of shape batch x latent.
  Matrix forward(const std::vector<Matrix>& xs, nn::Mode mode, Rng* rng, bool record = false);
  void backward(const Matrix& ddelta);

  /// One window (N x latent) to one delta, inference mode.
  Vector predict_delta(const Matrix& window);

  /// predict_delta + the window's last row.
  Vector next_latent(const Matrix& window);

  nn::ParameterSet params();

  void save(const std::filesystem::path& path, ForecasterMode mode, DiscInput disc_input) const;
  struct Loaded;
  static Loaded load(const std::filesystem::path& path);

 private:
  Eigen::Index latent_dim_, hidden_dim_, time_lag_;
  double dropout_rate_;
  nn::LSTMLayer lstm_;
  nn::BatchNormLayer bn_;
  nn::DropoutLayer dropout_;
  nn::DenseLayer head_;
};

struct ForecasterModel::Loaded {
  ForecasterModel model;
  ForecasterMode mode;
  DiscInput disc_input;
};

/// Mirrored LSTM discriminator over delta candidates. Context-conditioned
/// input widens each step to [latent, delta-slot]; the candidate delta sits
/// in the slot of the final step only. Delta-only input is a one-step
/// sequence holding just the delta.
class DeltaDiscriminator {
 public:
  DeltaDiscriminator(Eigen::Index latent_dim, Eigen::Index hidden_dim, DiscInput input_kind,
                     double dropout_rate, std::uint64_t init_seed);

  DiscInput input_kind() const { return input_kind_; }
  Eigen::Index latent_dim() const { return latent_dim_; }

  /// Builds the discriminator input sequence from window steps and deltas.
  std::vector<Matrix> assemble_inputs(const std::vector<Matrix>& window_steps,
                                      const Matrix& deltas) const;

  Matrix logits(const std::vector<Matrix>& inputs, nn::Mode mode, Rng* rng, bool record = false);
  Matrix probabilities(const std::vector<Matrix>& inputs, nn::Mode mode, Rng* rng,
                       bool record = false);

  /// Input gradients per step; the delta-slot gradient of the last step
  /// feeds the generator during its adversarial update.
  std::vector<Matrix> backward(const Matrix& dlogits);
  Matrix delta_gradient(const std::vector<Matrix>& input_grads) const;

  nn::ParameterSet params();

 private:
  Eigen::Index latent_dim_, hidden_dim_;
  DiscInput input_kind_;
  nn::LSTMLayer lstm_;
  nn::BatchNormLayer bn_;
  nn::DropoutLayer dropout_;
  nn::DenseLayer head_;
};

struct ForecasterEpochStats {
  double gen_adv_loss = 0.0;
  double gen_mse = 0.0;
  double disc_loss = 0.0;
};

struct ForecasterTrainingLog {
  ForecasterMode mode = ForecasterMode::kAdversarial;
  std::vector<ForecasterEpochStats> epochs;
  void write_csv(const std::filesystem::path& path) const;
};

// Observation hook for tests; fires inside the real training loop.
enum class TrainPhase { kBatchStart, kAfterDiscriminatorStep, kAfterGeneratorStep };
using ForecasterHook = std::function<void(TrainPhase, Eigen::Index epoch, Eigen::Index batch,
                                          ForecasterModel&, DeltaDiscriminator*)>;

struct ForecasterTrainResult {
  ForecasterModel generator;
  ForecasterTrainingLog log;
  Eigen::Index train_window_count = 0;  // leading windows used for updates
};

/// Adversarial mode alternates one discriminator and one generator update
/// per batch; classic mode trains the identical generator architecture with
/// the reconstruction loss only. Generators with equal seeds start from
/// bit-identical parameters in both modes.
ForecasterTrainResult train_forecaster(const ForecasterConfig& cfg, const WindowSet& windows,
                                       const ForecasterHook& hook = {});

}  // namespace advrom
