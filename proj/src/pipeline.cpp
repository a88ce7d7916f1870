#include "advrom/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>

#include "advrom/errors.hpp"
#include "advrom/forecast.hpp"
#include "advrom/io_util.hpp"
#include "advrom/pcaae.hpp"
#include "advrom/rom.hpp"
#include "json.hpp"

namespace advrom {

namespace {

using nlohmann::json;

void require_artifact(const std::filesystem::path& path, const std::string& producer) {
  if (!std::filesystem::exists(path)) {
    throw IoError("missing artifact " + path.string() + "; run `advrom " + producer + "` first");
  }
}

void write_manifest(const PipelinePaths& paths, const std::filesystem::path& dir,
                    const std::string& command, const RunConfig& cfg,
                    const std::vector<std::filesystem::path>& artifacts) {
  json manifest;
  manifest["command"] = command;
  manifest["seed"] = cfg.seed;
  manifest["config_hash"] = cfg.config_hash();
  manifest["config"] = json::parse(cfg.canonical_json());
  json files = json::object();
  for (const auto& artifact : artifacts) {
    const std::string rel = std::filesystem::relative(artifact, paths.root).string();
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a:%016llx",
                  static_cast<unsigned long long>(io::fnv1a64_file(artifact)));
    files[rel] = buf;
  }
  manifest["artifacts"] = files;
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write manifest under " + dir.string());
  out << manifest.dump(2) << '\n';
}

void say(bool quiet, const std::string& line) {
  if (!quiet) std::cout << line << '\n';
}

struct LoadedStack {
  SnapshotMatrix snapshots;
  RomArtifact rom;
  Matrix scaled_scores;  // full corpus, scaled with the training-fit params
};

LoadedStack load_data_and_rom(const PipelinePaths& paths) {
  require_artifact(paths.snapshots(), "gen-data");
  require_artifact(paths.rom_model(), "fit-rom");
  SnapshotMatrix snapshots = load_snapshots(paths.snapshots());
  RomArtifact rom = load_rom(paths.rom_model());
  if (rom.model.state_dim() != snapshots.state_dim()) {
    throw IoError("rom model state width does not match the snapshot corpus");
  }
  const Matrix scores = project(rom.model, snapshots.data(), rom.model.rank());
  Matrix scaled = scale_scores(scores, rom.scaling);
  return {std::move(snapshots), std::move(rom), std::move(scaled)};
}

AAEConfig aae_config_for(const RunConfig& cfg, Eigen::Index input_dim, Eigen::Index latent_dim) {
  AAEConfig aae;
  aae.input_dim = input_dim;
  aae.latent_dim = latent_dim;
  aae.batch_size = cfg.aae_batch_size;
  aae.epochs = cfg.aae_epochs;
  aae.lambda_rec = cfg.aae_lambda_rec;
  aae.optimizer.learning_rate = cfg.aae_learning_rate;
  aae.seed = cfg.derived_seed("aae/ls" + std::to_string(latent_dim));
  return aae;
}

ForecasterConfig forecaster_config_for(const RunConfig& cfg, Eigen::Index latent_dim,
                                       ForecasterMode mode) {
  ForecasterConfig fc;
  fc.latent_dim = latent_dim;
  fc.time_lag = cfg.forecaster_time_lag;
  fc.mode = mode;
  fc.disc_input = cfg.forecaster_disc_input;
  fc.batch_size = cfg.forecaster_batch_size;
  fc.epochs = cfg.forecaster_epochs;
  fc.lambda_rec = cfg.forecaster_lambda_rec;
  fc.dropout_rate = cfg.forecaster_dropout;
  fc.train_fraction = cfg.forecaster_train_fraction;
  fc.optimizer.learning_rate = cfg.forecaster_learning_rate;
  // One seed for both modes: identical generator initialization is the
  // fair-comparison guarantee.
  fc.seed = cfg.derived_seed("forecaster");
  return fc;
}

/// Posterior means (noise fixed to zero) of the scaled PC series.
Matrix encode_latent_series(AAEModel& aae, const Matrix& scaled_scores) {
  return aae.encode(scaled_scores).first;
}

Matrix per_step_abs_error(const Matrix& recon, const Matrix& truth) {
  return (recon - truth).cwiseAbs().rowwise().mean();
}

}  // namespace

void cmd_gen_data(const RunConfig& cfg, bool quiet) {
  cfg.validate();
  PipelinePaths paths{cfg.output_dir};

  SnapshotMatrix snapshots = [&] {
    if (cfg.snapshot_path) {
      say(quiet, "loading snapshots from " + cfg.snapshot_path->string());
      return load_snapshots(*cfg.snapshot_path);
    }
    SyntheticFlowConfig syn = cfg.synthetic;
    syn.seed = cfg.derived_seed("data");
    return generate_synthetic_flow(syn);
  }();

  save_snapshots(snapshots, paths.snapshots());
  std::vector<std::filesystem::path> artifacts = {paths.snapshots()};
  if (cfg.export_csv) {
    export_snapshots_csv(snapshots, paths.snapshots_csv());
    artifacts.push_back(paths.snapshots_csv());
  }
  write_manifest(paths, paths.data_dir(), "gen-data", cfg, artifacts);
  say(quiet, "snapshots: " + std::to_string(snapshots.steps()) + " steps x " +
                 std::to_string(snapshots.state_dim()) + " state values, lag-1 autocorrelation " +
                 io::format_f64(lag1_autocorrelation(snapshots)));
}

void cmd_fit_rom(const RunConfig& cfg, bool quiet) {
  cfg.validate();
  PipelinePaths paths{cfg.output_dir};
  require_artifact(paths.snapshots(), "gen-data");
  const SnapshotMatrix snapshots = load_snapshots(paths.snapshots());

  const auto n = snapshots.steps();
  const auto n_train = static_cast<Eigen::Index>(std::floor(cfg.train_fraction * static_cast<double>(n)));
  if (n_train < 2) throw ConfigError("train split too small: need at least 2 training rows");

  const SnapshotMatrix train_view(snapshots.data().topRows(n_train), snapshots.dt(),
                                  snapshots.layout());
  RomArtifact artifact;
  artifact.model = fit_pca(train_view);
  artifact.scaling = fit_scaling(artifact.model.scores);
  artifact.n_train = static_cast<std::uint64_t>(n_train);

  for (const auto tau : cfg.tau_grid) {
    if (tau > artifact.model.rank()) {
      throw ConfigError("rom.tau_grid entry " + std::to_string(tau) + " exceeds retained rank " +
                        std::to_string(artifact.model.rank()));
    }
  }

  save_rom(artifact, paths.rom_model());
  const Matrix scores_full = project(artifact.model, snapshots.data(), artifact.model.rank());
  export_scores_csv(scores_full, snapshots.dt(), paths.rom_scores_csv());

  io::CsvWriter table(paths.rom_truncation_csv(), {"tau", "mae_train", "mae_test"});
  for (const auto tau : cfg.tau_grid) {
    const Matrix truncated = project(artifact.model, snapshots.data(), tau);
    const SnapshotMatrix recon = reconstruct(artifact.model, truncated, tau);
    const Matrix abs_err = (recon.data() - snapshots.data()).cwiseAbs();
    const double mae_train = abs_err.topRows(n_train).mean();
    const double mae_test = abs_err.bottomRows(n - n_train).mean();
    table.row({static_cast<double>(tau), mae_train, mae_test});
  }
  table.close();

  write_manifest(paths, paths.rom_dir(), "fit-rom", cfg,
                 {paths.rom_model(), paths.rom_scores_csv(), paths.rom_truncation_csv()});
  say(quiet, "rom: rank " + std::to_string(artifact.model.rank()) + " fitted on " +
                 std::to_string(n_train) + " training rows");
}

void cmd_train_aae(const RunConfig& cfg, bool quiet) {
  cfg.validate();
  PipelinePaths paths{cfg.output_dir};
  LoadedStack stack = load_data_and_rom(paths);

  const auto n_train = static_cast<Eigen::Index>(stack.rom.n_train);
  const AAEConfig aae_cfg = aae_config_for(cfg, stack.rom.model.rank(), cfg.aae_latent_dim);
  say(quiet, "training autoencoder ls" + std::to_string(cfg.aae_latent_dim) + " on " +
                 std::to_string(n_train) + " rows (" + std::to_string(aae_cfg.epochs) + " epochs)");
  AAETrainResult result = train_aae(aae_cfg, stack.scaled_scores.topRows(n_train));

  result.model.save(paths.aae_model());
  result.log.write_csv(paths.aae_log_csv());
  write_manifest(paths, paths.aae_dir(), "train-aae", cfg,
                 {paths.aae_model(), paths.aae_log_csv()});
  say(quiet,
      "autoencoder trained; final reconstruction mse " +
          io::format_f64(result.log.epochs.empty() ? 0.0 : result.log.epochs.back().rec_mse));
}

void cmd_train_forecaster(const RunConfig& cfg, ForecasterMode mode, bool quiet) {
  cfg.validate();
  PipelinePaths paths{cfg.output_dir};
  LoadedStack stack = load_data_and_rom(paths);
  require_artifact(paths.aae_model(), "train-aae");
  AAEModel aae = AAEModel::load(paths.aae_model());

  const LatentSeries latents{encode_latent_series(aae, stack.scaled_scores)};
  const WindowSet windows = make_windows(latents, cfg.forecaster_time_lag);
  const ForecasterConfig fc = forecaster_config_for(cfg, aae.latent_dim(), mode);
  say(quiet, "training " + to_string(mode) + " forecaster on " + std::to_string(windows.count()) +
                 " windows (" + std::to_string(fc.epochs) + " epochs)");
  ForecasterTrainResult result = train_forecaster(fc, windows);

  const std::string mode_str = to_string(mode);
  result.generator.save(paths.forecaster_model(mode_str), mode, fc.disc_input);
  result.log.write_csv(paths.forecaster_log_csv(mode_str));
  write_manifest(paths, paths.forecaster_dir(mode_str), "train-forecaster --mode " + mode_str, cfg,
                 {paths.forecaster_model(mode_str), paths.forecaster_log_csv(mode_str)});
  say(quiet, mode_str + " forecaster trained; final mse " +
                 io::format_f64(result.log.epochs.empty() ? 0.0 : result.log.epochs.back().gen_mse));
}

void cmd_evaluate(const RunConfig& cfg, bool quiet) {
  cfg.validate();
  PipelinePaths paths{cfg.output_dir};
  LoadedStack stack = load_data_and_rom(paths);
  require_artifact(paths.aae_model(), "train-aae");
  require_artifact(paths.forecaster_model("adversarial"), "train-forecaster --mode adversarial");
  require_artifact(paths.forecaster_model("classic"), "train-forecaster --mode classic");

  AAEModel aae = AAEModel::load(paths.aae_model());
  auto adversarial = ForecasterModel::load(paths.forecaster_model("adversarial"));
  auto classic = ForecasterModel::load(paths.forecaster_model("classic"));
  if (adversarial.model.latent_dim() != aae.latent_dim() ||
      classic.model.latent_dim() != aae.latent_dim()) {
    throw IoError("forecaster checkpoints do not match the autoencoder latent width");
  }

  const Matrix latents = encode_latent_series(aae, stack.scaled_scores);
  EvaluationSetup setup;
  setup.time_lag = adversarial.model.time_lag();
  setup.start_begin = cfg.eval_start_begin;
  setup.start_count = cfg.eval_start_count;
  setup.horizon = cfg.eval_horizon;

  say(quiet, "evaluating " + std::to_string(setup.start_count) + " starts over horizon " +
                 std::to_string(setup.horizon));
  const EnsembleErrorCurve recon = reconstruction_only_curve(
      aae, stack.rom.model, stack.rom.scaling, latents, stack.snapshots, setup);
  ModelForecaster adv_wrap(adversarial.model);
  ModelForecaster cls_wrap(classic.model);
  const EnsembleErrorCurve adv_curve =
      ensemble_evaluate(adv_wrap, "adversarial", aae, stack.rom.model, stack.rom.scaling, latents,
                        stack.snapshots, setup);
  const EnsembleErrorCurve cls_curve =
      ensemble_evaluate(cls_wrap, "classic", aae, stack.rom.model, stack.rom.scaling, latents,
                        stack.snapshots, setup);

  recon.write_csv(paths.eval_curve_csv("reconstruction"));
  adv_curve.write_csv(paths.eval_curve_csv("adversarial"));
  cls_curve.write_csv(paths.eval_curve_csv("classic"));

  const double recon_mae = recon.mean_mae.mean();
  const ComparisonReport report =
      compare_report({adv_curve, cls_curve}, recon_mae, cfg.divergence_multiplier);
  json report_json = json::parse(report.to_json(cfg.config_hash(), cfg.seed));
  char buf[32];
  const auto hash_of = [&buf](const std::filesystem::path& p) {
    std::snprintf(buf, sizeof(buf), "fnv1a:%016llx",
                  static_cast<unsigned long long>(io::fnv1a64_file(p)));
    return std::string(buf);
  };
  report_json["checkpoints"] = {{"aae", hash_of(paths.aae_model())},
                                {"adversarial", hash_of(paths.forecaster_model("adversarial"))},
                                {"classic", hash_of(paths.forecaster_model("classic"))}};
  report_json["reconstruction_mae"] = recon_mae;
  std::filesystem::create_directories(paths.eval_dir());
  std::ofstream out(paths.comparison_json(), std::ios::trunc);
  if (!out) throw IoError("cannot write " + paths.comparison_json().string());
  out << report_json.dump(2) << '\n';
  out.close();

  write_manifest(paths, paths.eval_dir(), "evaluate", cfg,
                 {paths.eval_curve_csv("reconstruction"), paths.eval_curve_csv("adversarial"),
                  paths.eval_curve_csv("classic"), paths.comparison_json()});
  say(quiet, "winner at horizon end: " + report.winner_at_end);
}

void cmd_reproduce_fig2(const RunConfig& cfg, bool quiet) {
  cfg.validate();
  PipelinePaths paths{cfg.output_dir};
  LoadedStack stack = load_data_and_rom(paths);
  const auto n_train = static_cast<Eigen::Index>(stack.rom.n_train);
  const Eigen::Index n = stack.snapshots.steps();

  // Top panel: per-step reconstruction error of plain truncation against the
  // autoencoder, for every latent width in the grid.
  std::vector<Eigen::Index> grid = cfg.tau_grid;
  if (std::find(grid.begin(), grid.end(), cfg.aae_latent_dim) == grid.end()) {
    grid.push_back(cfg.aae_latent_dim);
  }
  std::vector<std::string> header = {"t"};
  std::vector<Vector> columns;
  std::map<Eigen::Index, AAEModel> trained;
  for (const auto tau : grid) {
    say(quiet, "fig2 top: latent width " + std::to_string(tau));
    const Matrix truncated = project(stack.rom.model, stack.snapshots.data(), tau);
    const SnapshotMatrix trunc_recon = reconstruct(stack.rom.model, truncated, tau);
    header.push_back("trunc_tau" + std::to_string(tau));
    columns.push_back(per_step_abs_error(trunc_recon.data(), stack.snapshots.data()));

    const bool valid_latent = tau == 4 || tau == 8 || tau == 16 || tau == 32;
    if (!valid_latent) continue;  // truncation-only column for off-ladder widths
    const AAEConfig aae_cfg = aae_config_for(cfg, stack.rom.model.rank(), tau);
    AAETrainResult trained_aae = train_aae(aae_cfg, stack.scaled_scores.topRows(n_train));
    const auto [mu, log_sigma] = trained_aae.model.encode(stack.scaled_scores);
    const Matrix decoded = decode_to_physical(trained_aae.model, stack.rom.model,
                                              stack.rom.scaling, mu);
    header.push_back("aae_ls" + std::to_string(tau));
    columns.push_back(per_step_abs_error(decoded, stack.snapshots.data()));
    trained.emplace(tau, std::move(trained_aae.model));
  }
  io::CsvWriter top(paths.fig2_top_csv(), header);
  for (Eigen::Index t = 0; t < n; ++t) {
    std::vector<double> row = {stack.snapshots.time_of(t)};
    for (const auto& col : columns) row.push_back(col(t));
    top.row(row);
  }
  top.close();

  // Bottom panel: forecast-error ensembles for the classic and adversarial
  // generators sharing one latent space.
  AAEModel& aae = trained.at(cfg.aae_latent_dim);
  const LatentSeries latents{encode_latent_series(aae, stack.scaled_scores)};
  const WindowSet windows = make_windows(latents, cfg.forecaster_time_lag);

  say(quiet, "fig2 bottom: training classic forecaster");
  ForecasterTrainResult classic =
      train_forecaster(forecaster_config_for(cfg, aae.latent_dim(), ForecasterMode::kClassic),
                       windows);
  say(quiet, "fig2 bottom: training adversarial forecaster");
  ForecasterTrainResult adversarial =
      train_forecaster(forecaster_config_for(cfg, aae.latent_dim(), ForecasterMode::kAdversarial),
                       windows);

  EvaluationSetup setup;
  setup.time_lag = cfg.forecaster_time_lag;
  setup.start_begin = cfg.eval_start_begin;
  setup.start_count = cfg.eval_start_count;
  setup.horizon = cfg.eval_horizon;

  const EnsembleErrorCurve recon = reconstruction_only_curve(
      aae, stack.rom.model, stack.rom.scaling, latents.values, stack.snapshots, setup);
  ModelForecaster cls_wrap(classic.generator);
  ModelForecaster adv_wrap(adversarial.generator);
  const EnsembleErrorCurve cls_curve =
      ensemble_evaluate(cls_wrap, "classic", aae, stack.rom.model, stack.rom.scaling,
                        latents.values, stack.snapshots, setup);
  const EnsembleErrorCurve adv_curve =
      ensemble_evaluate(adv_wrap, "adversarial", aae, stack.rom.model, stack.rom.scaling,
                        latents.values, stack.snapshots, setup);

  io::CsvWriter bottom(paths.fig2_bottom_csv(),
                       {"step", "classic_mean", "classic_std", "alstm_mean", "alstm_std",
                        "recon_mean"});
  for (Eigen::Index h = 0; h < setup.horizon; ++h) {
    bottom.row({static_cast<double>(h + 1), cls_curve.mean_mae(h), cls_curve.std_mae(h),
                adv_curve.mean_mae(h), adv_curve.std_mae(h), recon.mean_mae(h)});
  }
  bottom.close();

  write_manifest(paths, paths.fig2_dir(), "reproduce-fig2", cfg,
                 {paths.fig2_top_csv(), paths.fig2_bottom_csv()});
  say(quiet, "fig2 tables written under " + paths.fig2_dir().string());
}

}  // namespace advrom
