#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "advrom/linalg.hpp"
#include "advrom/nn/layers.hpp"
#include "advrom/nn/nadam.hpp"
#include "advrom/nn/params.hpp"

namespace advrom {

/// Configuration of the adversarial autoencoder on scaled principal
/// components. Encoder/decoder widths follow the fixed ladder
/// input -> 64 -> 32 -> ... -> latent (halving), mirrored on the way back,
/// with the discriminator a single latent -> 1 sigmoid layer.
struct AAEConfig {
  Eigen::Index input_dim = 0;
  Eigen::Index latent_dim = 8;  // one of 4, 8, 16, 32
  Eigen::Index batch_size = 32;
  Eigen::Index epochs = 500;
  std::uint64_t seed = 0;
  double lambda_rec = 1.0;  // weight of the reconstruction term
  nn::NadamConfig optimizer;

  std::vector<Eigen::Index> trunk_widths() const;    // encoder hidden widths
  std::vector<Eigen::Index> decoder_widths() const;  // decoder hidden widths
  void validate() const;
};

/// Encoder with Gaussian posterior heads, mirrored decoder with tanh output,
/// and a prior-matching discriminator. The three parts expose separate
/// parameter sets so the two optimizers cannot touch each other's blocks.
class AAEModel {
 public:
  AAEModel(Eigen::Index input_dim, Eigen::Index latent_dim, std::vector<Eigen::Index> trunk_widths,
           std::uint64_t init_seed);
  static AAEModel from_config(const AAEConfig& cfg);

  Eigen::Index input_dim() const { return input_dim_; }
  Eigen::Index latent_dim() const { return latent_dim_; }
  const std::vector<Eigen::Index>& trunk_widths() const { return trunk_widths_; }

  /// Deterministic forward through the trunk and both heads.
  std::pair<Matrix, Matrix> encode(const Matrix& p, nn::Mode mode = nn::Mode::kInfer,
                                   bool record = false);

  /// Deterministic forward through the decoder; output lies in (-1, 1).
  Matrix decode(const Matrix& z, nn::Mode mode = nn::Mode::kInfer, bool record = false);

  /// D^A(z) in (0, 1); 1 means "drawn from the N(0, I) prior".
  Matrix discriminate_prior(const Matrix& z, bool record = false);
  Matrix discriminate_logits(const Matrix& z, bool record = false);

  // Reverse-mode passes matching the recorded forwards. Gradients accumulate
  // into the layer buffers; the returned matrix is the input gradient.
  Matrix encode_backward(const Matrix& dmu, const Matrix& dlog_sigma);
  Matrix decode_backward(const Matrix& doutput);
  Matrix discriminate_backward(const Matrix& dlogits);

  nn::ParameterSet autoencoder_params();   // encoder + decoder blocks
  nn::ParameterSet discriminator_params();

  void save(const std::filesystem::path& path) const;
  static AAEModel load(const std::filesystem::path& path);

 private:
  struct Block {
    nn::DenseLayer dense;
    nn::BatchNormLayer bn;
    Matrix pre_activation;  // leaky-relu backward cache
  };

  Eigen::Index input_dim_, latent_dim_;
  std::vector<Eigen::Index> trunk_widths_;
  std::vector<Block> trunk_;
  nn::DenseLayer head_mu_, head_log_sigma_;
  std::vector<Block> decoder_hidden_;
  nn::DenseLayer decoder_out_;
  Matrix decoder_tanh_;  // cached output for the tanh backward
  nn::DenseLayer disc_;

  friend struct AAEModelAccess;
};

/// z = mu + exp(log_sigma) .* eps with eps supplied by the caller.
Matrix sample_latent(const Matrix& mu, const Matrix& log_sigma, const Matrix& eps);

struct AAEEpochStats {
  double disc_loss = 0.0;        // BCE(D(prior),1) + BCE(D(posterior),0)
  double adv_loss = 0.0;         // BCE(D(posterior),1) seen by the autoencoder
  double rec_mse = 0.0;          // reconstruction MSE term
  double latent_mean_norm = 0.0; // norm of the per-dimension latent mean
  double latent_var_mean = 0.0;  // mean per-dimension latent variance
};

struct AAETrainingLog {
  std::vector<AAEEpochStats> epochs;
  void write_csv(const std::filesystem::path& path) const;
};

struct AAETrainResult {
  AAEModel model;
  AAETrainingLog log;
};

/// Alternating adversarial training (one discriminator step, then one
/// autoencoder step per batch). `scaled_scores` must be training scores
/// scaled to [-1, 1], one row per time step.
AAETrainResult train_aae(const AAEConfig& cfg, const Matrix& scaled_scores);

}  // namespace advrom
