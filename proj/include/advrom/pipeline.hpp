#pragma once

#include <filesystem>

#include "advrom/runconfig.hpp"

namespace advrom {

/// On-disk layout of pipeline artifacts under the configured output
/// directory. Every command owns one subdirectory and writes a manifest
/// (config snapshot, seed, artifact hashes) next to its outputs.
struct PipelinePaths {
  std::filesystem::path root;

  std::filesystem::path data_dir() const { return root / "data"; }
  std::filesystem::path snapshots() const { return data_dir() / "snapshots.romsnap"; }
  std::filesystem::path snapshots_csv() const { return data_dir() / "snapshots.csv"; }
  std::filesystem::path rom_dir() const { return root / "rom"; }
  std::filesystem::path rom_model() const { return rom_dir() / "model.rompca"; }
  std::filesystem::path rom_scores_csv() const { return rom_dir() / "scores.csv"; }
  std::filesystem::path rom_truncation_csv() const { return rom_dir() / "truncation_mae.csv"; }
  std::filesystem::path aae_dir() const { return root / "aae"; }
  std::filesystem::path aae_model() const { return aae_dir() / "model.romnn"; }
  std::filesystem::path aae_log_csv() const { return aae_dir() / "training_log.csv"; }
  std::filesystem::path forecaster_dir(const std::string& mode) const {
    return root / "forecaster" / mode;
  }
  std::filesystem::path forecaster_model(const std::string& mode) const {
    return forecaster_dir(mode) / "model.romnn";
  }
  std::filesystem::path forecaster_log_csv(const std::string& mode) const {
    return forecaster_dir(mode) / "training_log.csv";
  }
  std::filesystem::path eval_dir() const { return root / "eval"; }
  std::filesystem::path eval_curve_csv(const std::string& model) const {
    return eval_dir() / ("curve_" + model + ".csv");
  }
  std::filesystem::path comparison_json() const { return eval_dir() / "comparison.json"; }
  std::filesystem::path fig2_dir() const { return root / "fig2"; }
  std::filesystem::path fig2_top_csv() const { return fig2_dir() / "top_reconstruction_mae.csv"; }
  std::filesystem::path fig2_bottom_csv() const {
    return fig2_dir() / "bottom_forecast_ensemble.csv";
  }
};

// Each command validates the config, consumes upstream artifacts (failing
// with the producer command's name when one is missing), writes its outputs
// and manifest, and is bit-identical on re-runs with the same config + seed.
void cmd_gen_data(const RunConfig& cfg, bool quiet);
void cmd_fit_rom(const RunConfig& cfg, bool quiet);
void cmd_train_aae(const RunConfig& cfg, bool quiet);
void cmd_train_forecaster(const RunConfig& cfg, ForecasterMode mode, bool quiet);
void cmd_evaluate(const RunConfig& cfg, bool quiet);
void cmd_reproduce_fig2(const RunConfig& cfg, bool quiet);

}  // namespace advrom
