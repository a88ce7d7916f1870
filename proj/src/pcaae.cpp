#include "advrom/pcaae.hpp"

#include <cmath>
#include <sstream>

#include "advrom/errors.hpp"
#include "advrom/io_util.hpp"
#include "advrom/nn/checkpoint.hpp"
#include "advrom/nn/losses.hpp"
#include "advrom/rng.hpp"
#include "json.hpp"

namespace advrom {

using nn::Mode;

std::vector<Eigen::Index> AAEConfig::trunk_widths() const {
  std::vector<Eigen::Index> widths;
  Eigen::Index w = 64;
  while (w > latent_dim) {
    widths.push_back(w);
    w /= 2;
  }
  widths.push_back(latent_dim);
  return widths;
}

std::vector<Eigen::Index> AAEConfig::decoder_widths() const {
  const auto trunk = trunk_widths();
  std::vector<Eigen::Index> widths(trunk.rbegin() + 1, trunk.rend());
  return widths;
}

void AAEConfig::validate() const {
  std::vector<std::string> problems;
  if (latent_dim != 4 && latent_dim != 8 && latent_dim != 16 && latent_dim != 32) {
    problems.push_back("latent_dim must be one of 4, 8, 16, 32");
  }
  if (input_dim < 2) problems.push_back("input_dim must be at least 2");
  if (latent_dim >= input_dim) problems.push_back("latent_dim must be smaller than input_dim");
  if (batch_size < 2) problems.push_back("batch_size must be at least 2 (batch norm)");
  if (epochs < 1) problems.push_back("epochs must be positive");
  if (!(lambda_rec >= 0.0)) problems.push_back("lambda_rec must be non-negative");
  if (!(optimizer.learning_rate > 0.0)) problems.push_back("learning rate must be positive");
  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid autoencoder config:";
    for (const auto& p : problems) msg << "\n  - " << p;
    throw ConfigError(msg.str());
  }
}

// ---------------------------------------------------------------------------
// AAEModel

namespace {

Matrix leaky_backward(const Matrix& dy, const Matrix& pre_activation) {
  return dy.cwiseProduct(pre_activation.unaryExpr(
      [](double v) { return v >= 0.0 ? 1.0 : nn::kLeakySlope; }));
}

}  // namespace

AAEModel::AAEModel(Eigen::Index input_dim, Eigen::Index latent_dim,
                   std::vector<Eigen::Index> trunk_widths, std::uint64_t init_seed)
    : input_dim_(input_dim),
      latent_dim_(latent_dim),
      trunk_widths_(std::move(trunk_widths)),
      head_mu_(trunk_widths_.empty() ? input_dim : trunk_widths_.back(), latent_dim),
      head_log_sigma_(trunk_widths_.empty() ? input_dim : trunk_widths_.back(), latent_dim),
      decoder_out_(1, 1),  // resized below once the decoder ladder is known
      disc_(latent_dim, 1) {
  if (input_dim < 1 || latent_dim < 1) throw ArgumentError("autoencoder dimensions must be positive");

  Eigen::Index prev = input_dim_;
  for (const Eigen::Index w : trunk_widths_) {
    trunk_.push_back({nn::DenseLayer(prev, w), nn::BatchNormLayer(w), Matrix()});
    prev = w;
  }

  std::vector<Eigen::Index> dec_widths(trunk_widths_.rbegin() + (trunk_widths_.empty() ? 0 : 1),
                                       trunk_widths_.rend());
  prev = latent_dim_;
  for (const Eigen::Index w : dec_widths) {
    decoder_hidden_.push_back({nn::DenseLayer(prev, w), nn::BatchNormLayer(w), Matrix()});
    prev = w;
  }
  decoder_out_ = nn::DenseLayer(prev, input_dim_);

  // Initialization draws happen in fixed layer order.
  Rng rng = Rng(init_seed).derive("aae-init");
  for (auto& block : trunk_) block.dense.init_glorot(rng);
  head_mu_.init_glorot(rng);
  head_log_sigma_.init_glorot(rng);
  for (auto& block : decoder_hidden_) block.dense.init_glorot(rng);
  decoder_out_.init_glorot(rng);
  disc_.init_glorot(rng);
}

AAEModel AAEModel::from_config(const AAEConfig& cfg) {
  cfg.validate();
  return AAEModel(cfg.input_dim, cfg.latent_dim, cfg.trunk_widths(), cfg.seed);
}

std::pair<Matrix, Matrix> AAEModel::encode(const Matrix& p, Mode mode, bool record) {
  if (p.cols() != input_dim_) {
    throw ArgumentError("encode input width " + std::to_string(p.cols()) + " != input_dim " +
                        std::to_string(input_dim_));
  }
  Matrix h = p;
  for (auto& block : trunk_) {
    h = block.dense.forward(h, record);
    h = block.bn.forward(h, mode, record);
    if (record) block.pre_activation = h;
    h = nn::leaky_relu(h);
  }
  Matrix mu = head_mu_.forward(h, record);
  Matrix log_sigma = head_log_sigma_.forward(h, record);
  return {std::move(mu), std::move(log_sigma)};
}

Matrix AAEModel::encode_backward(const Matrix& dmu, const Matrix& dlog_sigma) {
  Matrix dh = head_mu_.backward(dmu) + head_log_sigma_.backward(dlog_sigma);
  for (auto it = trunk_.rbegin(); it != trunk_.rend(); ++it) {
    dh = leaky_backward(dh, it->pre_activation);
    dh = it->bn.backward(dh);
    dh = it->dense.backward(dh);
  }
  return dh;
}

Matrix AAEModel::decode(const Matrix& z, Mode mode, bool record) {
  if (z.cols() != latent_dim_) {
    throw ArgumentError("decode input width " + std::to_string(z.cols()) + " != latent_dim " +
                        std::to_string(latent_dim_));
  }
  Matrix h = z;
  for (auto& block : decoder_hidden_) {
    h = block.dense.forward(h, record);
    h = block.bn.forward(h, mode, record);
    if (record) block.pre_activation = h;
    h = nn::leaky_relu(h);
  }
  Matrix out = decoder_out_.forward(h, record).unaryExpr([](double v) { return std::tanh(v); });
  if (record) decoder_tanh_ = out;
  return out;
}

Matrix AAEModel::decode_backward(const Matrix& doutput) {
  Matrix dpre =
      doutput.cwiseProduct((1.0 - decoder_tanh_.array().square()).matrix());
  Matrix dh = decoder_out_.backward(dpre);
  for (auto it = decoder_hidden_.rbegin(); it != decoder_hidden_.rend(); ++it) {
    dh = leaky_backward(dh, it->pre_activation);
    dh = it->bn.backward(dh);
    dh = it->dense.backward(dh);
  }
  return dh;
}

Matrix AAEModel::discriminate_logits(const Matrix& z, bool record) {
  if (z.cols() != latent_dim_) {
    throw ArgumentError("discriminator input width " + std::to_string(z.cols()) + " != latent_dim " +
                        std::to_string(latent_dim_));
  }
  return disc_.forward(z, record);
}

Matrix AAEModel::discriminate_prior(const Matrix& z, bool record) {
  return discriminate_logits(z, record).unaryExpr([](double v) { return nn::sigmoid(v); });
}

Matrix AAEModel::discriminate_backward(const Matrix& dlogits) { return disc_.backward(dlogits); }

nn::ParameterSet AAEModel::autoencoder_params() {
  nn::ParameterSet set;
  for (std::size_t i = 0; i < trunk_.size(); ++i) {
    const std::string prefix = "enc.trunk" + std::to_string(i);
    trunk_[i].dense.register_params(set, prefix + ".dense");
    trunk_[i].bn.register_params(set, prefix + ".bn");
  }
  head_mu_.register_params(set, "enc.mu");
  head_log_sigma_.register_params(set, "enc.log_sigma");
  for (std::size_t i = 0; i < decoder_hidden_.size(); ++i) {
    const std::string prefix = "dec.hidden" + std::to_string(i);
    decoder_hidden_[i].dense.register_params(set, prefix + ".dense");
    decoder_hidden_[i].bn.register_params(set, prefix + ".bn");
  }
  decoder_out_.register_params(set, "dec.out");
  return set;
}

nn::ParameterSet AAEModel::discriminator_params() {
  nn::ParameterSet set;
  disc_.register_params(set, "disc");
  return set;
}

Matrix sample_latent(const Matrix& mu, const Matrix& log_sigma, const Matrix& eps) {
  if (mu.rows() != log_sigma.rows() || mu.cols() != log_sigma.cols() || mu.rows() != eps.rows() ||
      mu.cols() != eps.cols()) {
    throw ArgumentError("sample_latent shape mismatch");
  }
  return mu + log_sigma.array().exp().matrix().cwiseProduct(eps);
}

// ---------------------------------------------------------------------------
// Persistence

void AAEModel::save(const std::filesystem::path& path) const {
  nn::Checkpoint ckpt;
  ckpt.model_kind = nn::ModelKind::kAutoencoder;
  nlohmann::json manifest;
  manifest["model"] = "pc-aae";
  manifest["input_dim"] = input_dim_;
  manifest["latent_dim"] = latent_dim_;
  manifest["trunk_widths"] = trunk_widths_;
  ckpt.manifest_json = manifest.dump();

  for (std::size_t i = 0; i < trunk_.size(); ++i) {
    const std::string prefix = "enc.trunk" + std::to_string(i);
    ckpt.layers.push_back(nn::pack_dense(trunk_[i].dense, prefix + ".dense"));
    ckpt.layers.push_back(nn::pack_batchnorm(trunk_[i].bn, prefix + ".bn"));
  }
  ckpt.layers.push_back(nn::pack_dense(head_mu_, "enc.mu"));
  ckpt.layers.push_back(nn::pack_dense(head_log_sigma_, "enc.log_sigma"));
  for (std::size_t i = 0; i < decoder_hidden_.size(); ++i) {
    const std::string prefix = "dec.hidden" + std::to_string(i);
    ckpt.layers.push_back(nn::pack_dense(decoder_hidden_[i].dense, prefix + ".dense"));
    ckpt.layers.push_back(nn::pack_batchnorm(decoder_hidden_[i].bn, prefix + ".bn"));
  }
  ckpt.layers.push_back(nn::pack_dense(decoder_out_, "dec.out"));
  ckpt.layers.push_back(nn::pack_dense(disc_, "disc"));
  nn::save_checkpoint(ckpt, path);
}

AAEModel AAEModel::load(const std::filesystem::path& path) {
  const nn::Checkpoint ckpt = nn::load_checkpoint(path);
  if (ckpt.model_kind != nn::ModelKind::kAutoencoder) {
    throw IoError(path.string() + ": not an autoencoder checkpoint");
  }
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(ckpt.manifest_json);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": bad manifest: " + e.what());
  }
  AAEModel model(manifest.at("input_dim").get<Eigen::Index>(),
                 manifest.at("latent_dim").get<Eigen::Index>(),
                 manifest.at("trunk_widths").get<std::vector<Eigen::Index>>(), 0);

  const std::size_t expected = 2 * model.trunk_.size() + 2 + 2 * model.decoder_hidden_.size() + 2;
  if (ckpt.layers.size() != expected) {
    throw IoError(path.string() + ": layer count mismatch against manifest");
  }
  std::size_t k = 0;
  for (auto& block : model.trunk_) {
    nn::unpack_dense(block.dense, ckpt.layers[k++]);
    nn::unpack_batchnorm(block.bn, ckpt.layers[k++]);
  }
  nn::unpack_dense(model.head_mu_, ckpt.layers[k++]);
  nn::unpack_dense(model.head_log_sigma_, ckpt.layers[k++]);
  for (auto& block : model.decoder_hidden_) {
    nn::unpack_dense(block.dense, ckpt.layers[k++]);
    nn::unpack_batchnorm(block.bn, ckpt.layers[k++]);
  }
  nn::unpack_dense(model.decoder_out_, ckpt.layers[k++]);
  nn::unpack_dense(model.disc_, ckpt.layers[k++]);
  return model;
}

// ---------------------------------------------------------------------------
// Training

void AAETrainingLog::write_csv(const std::filesystem::path& path) const {
  io::CsvWriter csv(path,
                    {"epoch", "disc_loss", "adv_loss", "rec_mse", "latent_mean_norm", "latent_var_mean"});
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const auto& e = epochs[i];
    csv.row({static_cast<double>(i), e.disc_loss, e.adv_loss, e.rec_mse, e.latent_mean_norm,
             e.latent_var_mean});
  }
  csv.close();
}

AAETrainResult train_aae(const AAEConfig& cfg, const Matrix& scaled_scores) {
  cfg.validate();
  if (scaled_scores.cols() != cfg.input_dim) {
    throw ArgumentError("training scores width " + std::to_string(scaled_scores.cols()) +
                        " != configured input_dim " + std::to_string(cfg.input_dim));
  }
  if (scaled_scores.rows() < cfg.batch_size) {
    throw ArgumentError("training needs at least one full batch of rows");
  }

  AAEModel model = AAEModel::from_config(cfg);
  nn::ParameterSet ae_params = model.autoencoder_params();
  nn::ParameterSet disc_params = model.discriminator_params();
  nn::NadamOptimizer ae_opt(cfg.optimizer, ae_params);
  nn::NadamOptimizer disc_opt(cfg.optimizer, disc_params);

  // Per-epoch draw order: shuffle, then per batch prior samples, the
  // discriminator-step noise, and the autoencoder-step noise.
  Rng rng = Rng(cfg.seed).derive("aae-train");
  const Eigen::Index n = scaled_scores.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  AAETrainingLog log;
  log.epochs.reserve(static_cast<std::size_t>(cfg.epochs));

  const auto draw_normal = [&rng](Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    }
    return m;
  };

  for (Eigen::Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double sum_disc = 0.0;
    double sum_adv = 0.0;
    double sum_rec = 0.0;
    Eigen::Index batches = 0;

    for (Eigen::Index begin = 0; begin + 1 < n; begin += cfg.batch_size) {
      const Eigen::Index size = std::min<Eigen::Index>(cfg.batch_size, n - begin);
      if (size < 2) break;  // batch norm needs two samples
      Matrix batch(size, cfg.input_dim);
      for (Eigen::Index i = 0; i < size; ++i) {
        batch.row(i) = scaled_scores.row(order[static_cast<std::size_t>(begin + i)]);
      }

      // Discriminator step. The encoder runs in inference mode here so this
      // step touches no autoencoder state.
      const Matrix prior = draw_normal(size, cfg.latent_dim);
      const auto [mu_d, log_sigma_d] = model.encode(batch, Mode::kInfer, false);
      const Matrix eps_d = draw_normal(size, cfg.latent_dim);
      const Matrix z_d = sample_latent(mu_d, log_sigma_d, eps_d);

      Matrix disc_in(2 * size, cfg.latent_dim);
      disc_in << prior, z_d;
      disc_params.zero_grads();
      const Matrix logits = model.discriminate_logits(disc_in, true);
      const Matrix probs = logits.unaryExpr([](double v) { return nn::sigmoid(v); });
      const double disc_loss =
          nn::bce_loss(probs.topRows(size), 1.0) + nn::bce_loss(probs.bottomRows(size), 0.0);
      Matrix dlogits(2 * size, 1);
      dlogits.topRows(size) = nn::bce_logit_grad(probs.topRows(size), 1.0);
      dlogits.bottomRows(size) = nn::bce_logit_grad(probs.bottomRows(size), 0.0);
      model.discriminate_backward(dlogits);
      disc_opt.step(disc_params);

      // Autoencoder step: adversarial term plus weighted reconstruction.
      ae_params.zero_grads();
      disc_params.zero_grads();  // discriminator grads accumulate below but are never applied
      const auto [mu, log_sigma] = model.encode(batch, Mode::kTrain, true);
      const Matrix eps = draw_normal(size, cfg.latent_dim);
      const Matrix z = sample_latent(mu, log_sigma, eps);
      const Matrix recon = model.decode(z, Mode::kTrain, true);
      const Matrix gen_logits = model.discriminate_logits(z, true);
      const Matrix gen_probs = gen_logits.unaryExpr([](double v) { return nn::sigmoid(v); });

      const double adv_loss = nn::bce_loss(gen_probs, 1.0);
      const double rec_loss = nn::mse_loss(recon, batch);
      const double total = adv_loss + cfg.lambda_rec * rec_loss;
      if (!std::isfinite(total)) {
        throw NumericError("non-finite autoencoder loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batches));
      }

      const Matrix dz_adv = model.discriminate_backward(nn::bce_logit_grad(gen_probs, 1.0));
      const Matrix drecon = cfg.lambda_rec * nn::mse_grad(recon, batch);
      const Matrix dz = model.decode_backward(drecon) + dz_adv;
      const Matrix dmu = dz;
      const Matrix dlog_sigma =
          dz.cwiseProduct(eps).cwiseProduct(log_sigma.array().exp().matrix());
      model.encode_backward(dmu, dlog_sigma);
      ae_opt.step(ae_params);

      sum_disc += disc_loss;
      sum_adv += adv_loss;
      sum_rec += rec_loss;
      ++batches;
    }

    AAEEpochStats stats;
    stats.disc_loss = sum_disc / static_cast<double>(batches);
    stats.adv_loss = sum_adv / static_cast<double>(batches);
    stats.rec_mse = sum_rec / static_cast<double>(batches);
    const auto [mu_all, log_sigma_all] = model.encode(scaled_scores, Mode::kInfer, false);
    const Vector latent_mean = mu_all.colwise().mean().transpose();
    const Vector mu_var = (mu_all.rowwise() - latent_mean.transpose())
                              .array()
                              .square()
                              .colwise()
                              .mean()
                              .matrix()
                              .transpose();
    const Vector noise_var =
        (2.0 * log_sigma_all.array()).exp().colwise().mean().transpose().matrix();
    stats.latent_mean_norm = latent_mean.norm();
    stats.latent_var_mean = (mu_var + noise_var).mean();
    log.epochs.push_back(stats);
  }

  return {std::move(model), std::move(log)};
}

}  // namespace advrom
