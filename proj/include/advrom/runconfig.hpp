#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "advrom/alstm.hpp"
#include "advrom/nn/nadam.hpp"
#include "advrom/snapshots.hpp"

namespace advrom {

/// One config file drives the whole pipeline; command-line flags override
/// the scalar fields. Parsed from JSON with line-numbered parse errors, and
/// validation reports every violation at once.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  // data section: either a synthetic corpus or an existing snapshot file
  SyntheticFlowConfig synthetic;
  std::optional<std::filesystem::path> snapshot_path;
  bool export_csv = false;

  double train_fraction = 0.8;  // leading rows used to fit ROM/AAE

  std::vector<Eigen::Index> tau_grid = {4, 8, 16, 32};

  // aae section
  Eigen::Index aae_latent_dim = 8;
  Eigen::Index aae_batch_size = 32;
  Eigen::Index aae_epochs = 500;
  double aae_lambda_rec = 1.0;
  double aae_learning_rate = 1e-3;

  // forecaster section (applies to both modes)
  Eigen::Index forecaster_time_lag = 5;
  Eigen::Index forecaster_batch_size = 32;
  Eigen::Index forecaster_epochs = 300;
  double forecaster_lambda_rec = 1.0;
  double forecaster_learning_rate = 1e-3;
  double forecaster_dropout = 0.5;
  double forecaster_train_fraction = 0.8;
  DiscInput forecaster_disc_input = DiscInput::kContextConditioned;

  // evaluation section
  Eigen::Index eval_start_begin = 150;
  Eigen::Index eval_start_count = 50;
  Eigen::Index eval_horizon = 100;
  double divergence_multiplier = 2.0;

  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_json_text(const std::string& text, const std::string& origin);

  void validate() const;  // throws ConfigError listing every violation

  /// Canonical JSON rendering; equal configs produce identical text, which
  /// is what manifests embed and hash.
  std::string canonical_json() const;
  std::uint64_t config_hash() const;

  /// All stage seeds derive deterministically from the global seed.
  std::uint64_t derived_seed(const std::string& label) const;
};

}  // namespace advrom
