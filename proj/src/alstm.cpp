#include "advrom/alstm.hpp"

#include <cmath>
#include <sstream>

#include "advrom/errors.hpp"
#include "advrom/io_util.hpp"
#include "advrom/nn/checkpoint.hpp"
#include "advrom/nn/losses.hpp"
#include "json.hpp"

namespace advrom {

using nn::Mode;

std::string to_string(ForecasterMode mode) {
  return mode == ForecasterMode::kAdversarial ? "adversarial" : "classic";
}

ForecasterMode forecaster_mode_from_string(const std::string& s) {
  if (s == "adversarial") return ForecasterMode::kAdversarial;
  if (s == "classic") return ForecasterMode::kClassic;
  throw ConfigError("unknown forecaster mode \"" + s + "\" (use adversarial or classic)");
}

void ForecasterConfig::validate() const {
  std::vector<std::string> problems;
  if (latent_dim < 1) problems.push_back("latent_dim must be positive");
  if (time_lag < 1) problems.push_back("time_lag must be at least 1");
  if (hidden_dim != 64) problems.push_back("hidden_dim is fixed at 64 by the architecture table");
  if (batch_size < 2) problems.push_back("batch_size must be at least 2 (batch norm)");
  if (epochs < 1) problems.push_back("epochs must be positive");
  if (!(lambda_rec >= 0.0)) problems.push_back("lambda_rec must be non-negative");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    problems.push_back("train_fraction must lie in (0, 1]");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    problems.push_back("dropout_rate must lie in [0, 1)");
  }
  if (!(optimizer.learning_rate > 0.0)) problems.push_back("learning rate must be positive");
  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid forecaster config:";
    for (const auto& p : problems) msg << "\n  - " << p;
    throw ConfigError(msg.str());
  }
}

// ---------------------------------------------------------------------------
// WindowSet

WindowSet::WindowSet(const LatentSeries& series, Eigen::Index time_lag)
    : series_(series.values), time_lag_(time_lag) {
  if (time_lag < 1) throw ArgumentError("time lag must be at least 1");
  const Eigen::Index t = series_.rows();
  if (t <= time_lag) {
    throw ArgumentError("series length " + std::to_string(t) +
                        " too short for time lag " + std::to_string(time_lag) +
                        " (needs at least time_lag + 1 steps)");
  }
  const Eigen::Index count = t - time_lag;
  targets_.resize(count, series_.cols());
  for (Eigen::Index k = 0; k < count; ++k) {
    targets_.row(k) = series_.row(k + time_lag) - series_.row(k + time_lag - 1);
  }
}

Matrix WindowSet::window(Eigen::Index k) const {
  if (k < 0 || k >= count()) throw ArgumentError("window index out of range");
  return series_.middleRows(k, time_lag_);
}

Vector WindowSet::target(Eigen::Index k) const {
  if (k < 0 || k >= count()) throw ArgumentError("window index out of range");
  return targets_.row(k).transpose();
}

Vector WindowSet::window_last(Eigen::Index k) const {
  if (k < 0 || k >= count()) throw ArgumentError("window index out of range");
  return series_.row(k + time_lag_ - 1).transpose();
}

std::vector<Matrix> WindowSet::gather_steps(const std::vector<Eigen::Index>& which) const {
  std::vector<Matrix> steps(static_cast<std::size_t>(time_lag_));
  for (Eigen::Index t = 0; t < time_lag_; ++t) {
    Matrix step(static_cast<Eigen::Index>(which.size()), series_.cols());
    for (std::size_t b = 0; b < which.size(); ++b) {
      step.row(static_cast<Eigen::Index>(b)) = series_.row(which[b] + t);
    }
    steps[static_cast<std::size_t>(t)] = std::move(step);
  }
  return steps;
}

Matrix WindowSet::gather_targets(const std::vector<Eigen::Index>& which) const {
  Matrix out(static_cast<Eigen::Index>(which.size()), targets_.cols());
  for (std::size_t b = 0; b < which.size(); ++b) {
    out.row(static_cast<Eigen::Index>(b)) = targets_.row(which[b]);
  }
  return out;
}

Matrix WindowSet::gather_last(const std::vector<Eigen::Index>& which) const {
  Matrix out(static_cast<Eigen::Index>(which.size()), series_.cols());
  for (std::size_t b = 0; b < which.size(); ++b) {
    out.row(static_cast<Eigen::Index>(b)) = series_.row(which[b] + time_lag_ - 1);
  }
  return out;
}

WindowSet make_windows(const LatentSeries& series, Eigen::Index time_lag) {
  return WindowSet(series, time_lag);
}

// ---------------------------------------------------------------------------
// ForecasterModel

ForecasterModel::ForecasterModel(Eigen::Index latent_dim, Eigen::Index hidden_dim,
                                 Eigen::Index time_lag, double dropout_rate,
                                 std::uint64_t init_seed)
    : latent_dim_(latent_dim),
      hidden_dim_(hidden_dim),
      time_lag_(time_lag),
      dropout_rate_(dropout_rate),
      lstm_(latent_dim, hidden_dim),
      bn_(hidden_dim),
      dropout_(dropout_rate),
      head_(hidden_dim, latent_dim) {
  if (time_lag < 1) throw ArgumentError("time lag must be at least 1");
  Rng rng = Rng(init_seed).derive("forecaster-init/generator");
  lstm_.init_glorot(rng);
  head_.init_glorot(rng);
}

Matrix ForecasterModel::forward(const std::vector<Matrix>& xs, Mode mode, Rng* rng, bool record) {
  if (static_cast<Eigen::Index>(xs.size()) != time_lag_) {
    throw ArgumentError("generator expects " + std::to_string(time_lag_) + " window steps, got " +
                        std::to_string(xs.size()));
  }
  if (mode == Mode::kTrain && dropout_rate_ > 0.0 && rng == nullptr) {
    throw ArgumentError("train-mode generator forward needs a random stream for dropout");
  }
  Matrix h = lstm_.forward(xs, record);
  h = bn_.forward(h, mode, record);
  static Rng unused_rng(0);
  h = dropout_.forward(h, mode, rng != nullptr ? *rng : unused_rng, record);
  return head_.forward(h, record);
}

void ForecasterModel::backward(const Matrix& ddelta) {
  Matrix dh = head_.backward(ddelta);
  dh = dropout_.backward(dh);
  dh = bn_.backward(dh);
  lstm_.backward(dh);
}

Vector ForecasterModel::predict_delta(const Matrix& window) {
  if (window.rows() != time_lag_ || window.cols() != latent_dim_) {
    throw ArgumentError("window shape " + std::to_string(window.rows()) + "x" +
                        std::to_string(window.cols()) + " does not match generator (" +
                        std::to_string(time_lag_) + "x" + std::to_string(latent_dim_) + ")");
  }
  std::vector<Matrix> xs(static_cast<std::size_t>(time_lag_));
  for (Eigen::Index t = 0; t < time_lag_; ++t) xs[static_cast<std::size_t>(t)] = window.row(t);
  return forward(xs, Mode::kInfer, nullptr).row(0).transpose();
}

Vector ForecasterModel::next_latent(const Matrix& window) {
  return predict_delta(window) + window.row(window.rows() - 1).transpose();
}

nn::ParameterSet ForecasterModel::params() {
  nn::ParameterSet set;
  lstm_.register_params(set, "gen.lstm");
  bn_.register_params(set, "gen.bn");
  head_.register_params(set, "gen.head");
  return set;
}

void ForecasterModel::save(const std::filesystem::path& path, ForecasterMode mode,
                           DiscInput disc_input) const {
  nn::Checkpoint ckpt;
  ckpt.model_kind = nn::ModelKind::kForecaster;
  nlohmann::json manifest;
  manifest["model"] = "latent-forecaster";
  manifest["mode"] = to_string(mode);
  manifest["time_lag"] = time_lag_;
  manifest["latent_dim"] = latent_dim_;
  manifest["hidden_dim"] = hidden_dim_;
  manifest["dropout_rate"] = dropout_rate_;
  manifest["disc_input"] =
      disc_input == DiscInput::kContextConditioned ? "context" : "delta-only";
  ckpt.manifest_json = manifest.dump();
  ckpt.layers.push_back(nn::pack_lstm(lstm_, "gen.lstm"));
  ckpt.layers.push_back(nn::pack_batchnorm(bn_, "gen.bn"));
  ckpt.layers.push_back(nn::pack_dense(head_, "gen.head"));
  nn::save_checkpoint(ckpt, path);
}

ForecasterModel::Loaded ForecasterModel::load(const std::filesystem::path& path) {
  const nn::Checkpoint ckpt = nn::load_checkpoint(path);
  if (ckpt.model_kind != nn::ModelKind::kForecaster) {
    throw IoError(path.string() + ": not a forecaster checkpoint");
  }
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(ckpt.manifest_json);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": bad manifest: " + e.what());
  }
  ForecasterModel model(manifest.at("latent_dim").get<Eigen::Index>(),
                        manifest.at("hidden_dim").get<Eigen::Index>(),
                        manifest.at("time_lag").get<Eigen::Index>(),
                        manifest.at("dropout_rate").get<double>(), 0);
  if (ckpt.layers.size() != 3) throw IoError(path.string() + ": layer count mismatch");
  nn::unpack_lstm(model.lstm_, ckpt.layers[0]);
  nn::unpack_batchnorm(model.bn_, ckpt.layers[1]);
  nn::unpack_dense(model.head_, ckpt.layers[2]);
  const auto mode = forecaster_mode_from_string(manifest.at("mode").get<std::string>());
  const auto disc_input = manifest.at("disc_input").get<std::string>() == "context"
                              ? DiscInput::kContextConditioned
                              : DiscInput::kDeltaOnly;
  return {std::move(model), mode, disc_input};
}

// ---------------------------------------------------------------------------
// DeltaDiscriminator

DeltaDiscriminator::DeltaDiscriminator(Eigen::Index latent_dim, Eigen::Index hidden_dim,
                                       DiscInput input_kind, double dropout_rate,
                                       std::uint64_t init_seed)
    : latent_dim_(latent_dim),
      hidden_dim_(hidden_dim),
      input_kind_(input_kind),
      lstm_(input_kind == DiscInput::kContextConditioned ? 2 * latent_dim : latent_dim, hidden_dim),
      bn_(hidden_dim),
      dropout_(dropout_rate),
      head_(hidden_dim, 1) {
  Rng rng = Rng(init_seed).derive("forecaster-init/discriminator");
  lstm_.init_glorot(rng);
  head_.init_glorot(rng);
}

std::vector<Matrix> DeltaDiscriminator::assemble_inputs(const std::vector<Matrix>& window_steps,
                                                        const Matrix& deltas) const {
  if (deltas.cols() != latent_dim_) throw ArgumentError("delta width mismatch");
  if (input_kind_ == DiscInput::kDeltaOnly) {
    return {deltas};
  }
  if (window_steps.empty()) {
    throw ArgumentError("context-conditioned discriminator needs window steps");
  }
  std::vector<Matrix> inputs(window_steps.size());
  const Eigen::Index batch = deltas.rows();
  for (std::size_t t = 0; t < window_steps.size(); ++t) {
    if (window_steps[t].rows() != batch || window_steps[t].cols() != latent_dim_) {
      throw ArgumentError("window step shape mismatch in discriminator input");
    }
    Matrix step(batch, 2 * latent_dim_);
    step.leftCols(latent_dim_) = window_steps[t];
    if (t + 1 == window_steps.size()) {
      step.rightCols(latent_dim_) = deltas;  // candidate rides the final step
    } else {
      step.rightCols(latent_dim_).setZero();
    }
    inputs[t] = std::move(step);
  }
  return inputs;
}

Matrix DeltaDiscriminator::logits(const std::vector<Matrix>& inputs, Mode mode, Rng* rng,
                                  bool record) {
  if (mode == Mode::kTrain && dropout_.rate() > 0.0 && rng == nullptr) {
    throw ArgumentError("train-mode discriminator forward needs a random stream for dropout");
  }
  Matrix h = lstm_.forward(inputs, record);
  h = bn_.forward(h, mode, record);
  static Rng unused_rng(0);
  h = dropout_.forward(h, mode, rng != nullptr ? *rng : unused_rng, record);
  return head_.forward(h, record);
}

Matrix DeltaDiscriminator::probabilities(const std::vector<Matrix>& inputs, Mode mode, Rng* rng,
                                         bool record) {
  return logits(inputs, mode, rng, record).unaryExpr([](double v) { return nn::sigmoid(v); });
}

std::vector<Matrix> DeltaDiscriminator::backward(const Matrix& dlogits) {
  Matrix dh = head_.backward(dlogits);
  dh = dropout_.backward(dh);
  dh = bn_.backward(dh);
  return lstm_.backward(dh);
}

Matrix DeltaDiscriminator::delta_gradient(const std::vector<Matrix>& input_grads) const {
  if (input_grads.empty()) throw ArgumentError("empty discriminator input gradients");
  if (input_kind_ == DiscInput::kDeltaOnly) return input_grads.front();
  return input_grads.back().rightCols(latent_dim_);
}

nn::ParameterSet DeltaDiscriminator::params() {
  nn::ParameterSet set;
  lstm_.register_params(set, "disc.lstm");
  bn_.register_params(set, "disc.bn");
  head_.register_params(set, "disc.head");
  return set;
}

// ---------------------------------------------------------------------------
// Training

void ForecasterTrainingLog::write_csv(const std::filesystem::path& path) const {
  if (mode == ForecasterMode::kAdversarial) {
    io::CsvWriter csv(path, {"epoch", "gen_adv_loss", "gen_mse", "disc_loss"});
    for (std::size_t i = 0; i < epochs.size(); ++i) {
      csv.row({static_cast<double>(i), epochs[i].gen_adv_loss, epochs[i].gen_mse,
               epochs[i].disc_loss});
    }
    csv.close();
  } else {
    io::CsvWriter csv(path, {"epoch", "mse"});
    for (std::size_t i = 0; i < epochs.size(); ++i) {
      csv.row({static_cast<double>(i), epochs[i].gen_mse});
    }
    csv.close();
  }
}

ForecasterTrainResult train_forecaster(const ForecasterConfig& cfg, const WindowSet& windows,
                                       const ForecasterHook& hook) {
  cfg.validate();
  if (windows.latent_dim() != cfg.latent_dim) {
    throw ArgumentError("window latent width " + std::to_string(windows.latent_dim()) +
                        " != configured latent_dim " + std::to_string(cfg.latent_dim));
  }
  if (windows.time_lag() != cfg.time_lag) {
    throw ArgumentError("window time lag " + std::to_string(windows.time_lag()) +
                        " != configured time_lag " + std::to_string(cfg.time_lag));
  }
  if (windows.count() < 1) throw ArgumentError("empty window set");

  const Eigen::Index train_count = std::max<Eigen::Index>(
      2, static_cast<Eigen::Index>(std::floor(cfg.train_fraction * windows.count())));
  if (train_count > windows.count()) {
    throw ArgumentError("not enough windows for the configured train fraction");
  }

  ForecasterModel generator(cfg.latent_dim, cfg.hidden_dim, cfg.time_lag, cfg.dropout_rate,
                            cfg.seed);
  std::optional<DeltaDiscriminator> disc;
  if (cfg.mode == ForecasterMode::kAdversarial) {
    disc.emplace(cfg.latent_dim, cfg.hidden_dim, cfg.disc_input, cfg.dropout_rate, cfg.seed);
  }

  nn::ParameterSet gen_params = generator.params();
  nn::NadamOptimizer gen_opt(cfg.optimizer, gen_params);
  std::optional<nn::ParameterSet> disc_params;
  std::optional<nn::NadamOptimizer> disc_opt;
  if (disc) {
    disc_params = disc->params();
    disc_opt.emplace(cfg.optimizer, *disc_params);
  }

  // Per-epoch draw order: shuffle, then per batch the discriminator-step
  // dropout mask followed by the generator-step dropout mask. Inference
  // forwards consume no draws.
  Rng rng = Rng(cfg.seed).derive("forecaster-train");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(train_count));
  for (Eigen::Index i = 0; i < train_count; ++i) order[static_cast<std::size_t>(i)] = i;

  ForecasterTrainingLog log;
  log.mode = cfg.mode;
  log.epochs.reserve(static_cast<std::size_t>(cfg.epochs));

  for (Eigen::Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double sum_adv = 0.0;
    double sum_mse = 0.0;
    double sum_disc = 0.0;
    Eigen::Index batches = 0;

    for (std::size_t begin = 0; begin + 1 < order.size(); begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t size =
          std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), order.size() - begin);
      if (size < 2) break;  // batch norm needs two samples
      const std::vector<Eigen::Index> which(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                            order.begin() + static_cast<std::ptrdiff_t>(begin + size));
      const std::vector<Matrix> steps = windows.gather_steps(which);
      const Matrix real_deltas = windows.gather_targets(which);
      const Eigen::Index batch = real_deltas.rows();

      if (hook) hook(TrainPhase::kBatchStart, epoch, batches, generator, disc ? &*disc : nullptr);

      double batch_mse = 0.0;
      if (cfg.mode == ForecasterMode::kAdversarial) {
        // Discriminator step; the generator runs in inference mode so its
        // state cannot change here.
        const Matrix fake_deltas = generator.forward(steps, Mode::kInfer, nullptr, false);

        std::vector<Matrix> disc_steps(steps.size());
        for (std::size_t t = 0; t < steps.size(); ++t) {
          Matrix doubled(2 * batch, steps[t].cols());
          doubled << steps[t], steps[t];
          disc_steps[t] = std::move(doubled);
        }
        Matrix stacked_deltas(2 * batch, cfg.latent_dim);
        stacked_deltas << real_deltas, fake_deltas;
        const std::vector<Matrix> disc_inputs = disc->assemble_inputs(disc_steps, stacked_deltas);

        disc_params->zero_grads();
        const Matrix logits = disc->logits(disc_inputs, Mode::kTrain, &rng, true);
        const Matrix probs = logits.unaryExpr([](double v) { return nn::sigmoid(v); });
        const double disc_loss =
            nn::bce_loss(probs.topRows(batch), 1.0) + nn::bce_loss(probs.bottomRows(batch), 0.0);
        if (!std::isfinite(disc_loss)) {
          throw NumericError("non-finite discriminator loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batches));
        }
        Matrix dlogits(2 * batch, 1);
        dlogits.topRows(batch) = nn::bce_logit_grad(probs.topRows(batch), 1.0);
        dlogits.bottomRows(batch) = nn::bce_logit_grad(probs.bottomRows(batch), 0.0);
        disc->backward(dlogits);
        disc_opt->step(*disc_params);
        sum_disc += disc_loss;

        if (hook) hook(TrainPhase::kAfterDiscriminatorStep, epoch, batches, generator, &*disc);

        // Generator step: fool the discriminator while matching the true
        // delta. The discriminator runs in inference mode and its gradients
        // are discarded.
        gen_params.zero_grads();
        disc_params->zero_grads();
        const Matrix gen_deltas = generator.forward(steps, Mode::kTrain, &rng, true);
        const std::vector<Matrix> gen_disc_inputs = disc->assemble_inputs(steps, gen_deltas);
        const Matrix gen_logits = disc->logits(gen_disc_inputs, Mode::kInfer, nullptr, true);
        const Matrix gen_probs = gen_logits.unaryExpr([](double v) { return nn::sigmoid(v); });

        const double adv_loss = nn::bce_loss(gen_probs, 1.0);
        batch_mse = nn::mse_loss(gen_deltas, real_deltas);
        const double total = adv_loss + cfg.lambda_rec * batch_mse;
        if (!std::isfinite(total)) {
          throw NumericError("non-finite generator loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batches));
        }

        const std::vector<Matrix> dinputs =
            disc->backward(nn::bce_logit_grad(gen_probs, 1.0));
        Matrix ddelta = disc->delta_gradient(dinputs);
        ddelta += cfg.lambda_rec * nn::mse_grad(gen_deltas, real_deltas);
        generator.backward(ddelta);
        gen_opt.step(gen_params);
        sum_adv += adv_loss;
      } else {
        // Classic mode: reconstruction loss only.
        gen_params.zero_grads();
        const Matrix gen_deltas = generator.forward(steps, Mode::kTrain, &rng, true);
        batch_mse = nn::mse_loss(gen_deltas, real_deltas);
        if (!std::isfinite(batch_mse)) {
          throw NumericError("non-finite generator loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batches));
        }
        generator.backward(nn::mse_grad(gen_deltas, real_deltas));
        gen_opt.step(gen_params);
      }

      sum_mse += batch_mse;
      ++batches;
      if (hook) {
        hook(TrainPhase::kAfterGeneratorStep, epoch, batches - 1, generator,
             disc ? &*disc : nullptr);
      }
    }

    ForecasterEpochStats stats;
    stats.gen_adv_loss = batches > 0 ? sum_adv / static_cast<double>(batches) : 0.0;
    stats.gen_mse = batches > 0 ? sum_mse / static_cast<double>(batches) : 0.0;
    stats.disc_loss = batches > 0 ? sum_disc / static_cast<double>(batches) : 0.0;
    log.epochs.push_back(stats);
  }

  return {std::move(generator), std::move(log), train_count};
}

}  // namespace advrom
