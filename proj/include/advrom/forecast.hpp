#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "advrom/alstm.hpp"
#include "advrom/linalg.hpp"
#include "advrom/pcaae.hpp"
#include "advrom/rom.hpp"
#include "advrom/snapshots.hpp"

namespace advrom {

/// Anything that can continue a latent window by one delta. `abs_index` is
/// the series index of the window's last row, so oracle implementations can
/// look the true continuation up.
class LatentForecaster {
 public:
  virtual ~LatentForecaster() = default;
  virtual Vector predict_delta(const Matrix& window, Eigen::Index abs_index) = 0;
};

class ModelForecaster final : public LatentForecaster {
 public:
  explicit ModelForecaster(ForecasterModel& model) : model_(&model) {}
  Vector predict_delta(const Matrix& window, Eigen::Index) override {
    return model_->predict_delta(window);
  }

 private:
  ForecasterModel* model_;
};

/// Oracle returning the delta actually observed in the series; a roll-out
/// driven by it tracks the true latents, so its ensemble error isolates the
/// reconstruction component.
class TrueDeltaForecaster final : public LatentForecaster {
 public:
  explicit TrueDeltaForecaster(const Matrix& series) : series_(&series) {}
  Vector predict_delta(const Matrix&, Eigen::Index abs_index) override;

 private:
  const Matrix* series_;
};

struct RolloutResult {
  Matrix latent_trajectory;        // up to H rows
  Eigen::Index start_index = 0;    // series index of the seed window's last row
  std::string model_id;
  Eigen::Index divergence_step = -1;  // 1-based step of the first non-finite value, -1 if none
};

/// Autoregressive roll-out: predict a delta, append, slide the window. No
/// ground truth enters after the seed window.
RolloutResult rollout(LatentForecaster& model, const Matrix& seed_window,
                      Eigen::Index start_index, Eigen::Index horizon,
                      const std::string& model_id = "");

/// Decoder -> unscale -> EOF expansion -> add mean. Throws a stage-named
/// error on any width mismatch.
Matrix decode_to_physical(AAEModel& aae, const PCAModel& rom, const ScalingParams& scaling,
                          const Matrix& z_rows);
Vector decode_to_physical(AAEModel& aae, const PCAModel& rom, const ScalingParams& scaling,
                          const Vector& z);

struct EnsembleErrorCurve {
  std::string model_id;
  Vector mean_mae;        // per horizon step, m/s
  Vector std_mae;         // population std over starts
  Matrix component_mae;   // horizon x component count, mean over starts
  Matrix per_start_mae;   // starts x horizon raw curves
  std::vector<Eigen::Index> starts;
  ComponentLayout layout = ComponentLayout::kScalar;

  void write_csv(const std::filesystem::path& path) const;
};

struct EvaluationSetup {
  Eigen::Index time_lag = 5;
  Eigen::Index start_begin = 0;  // series index of the first start (window end)
  Eigen::Index start_count = 1;
  Eigen::Index horizon = 100;
};

/// Rolls out from each start, decodes to physical space, and aggregates the
/// per-step mean absolute error across starts. Every model evaluated with
/// the same setup sees identical seed windows.
EnsembleErrorCurve ensemble_evaluate(LatentForecaster& model, const std::string& model_id,
                                     AAEModel& aae, const PCAModel& rom,
                                     const ScalingParams& scaling, const Matrix& latents,
                                     const SnapshotMatrix& truth, const EvaluationSetup& setup);

/// Error of decoding the true latents directly — the floor any forecaster
/// sits on top of.
EnsembleErrorCurve reconstruction_only_curve(AAEModel& aae, const PCAModel& rom,
                                             const ScalingParams& scaling, const Matrix& latents,
                                             const SnapshotMatrix& truth,
                                             const EvaluationSetup& setup);

struct ModelComparison {
  std::string model_id;
  double mae_at_end = 0.0;
  Eigen::Index divergence_step = -1;  // first step whose mean MAE exceeds the threshold
};

struct ComparisonReport {
  std::vector<ModelComparison> models;
  Matrix step_differences;  // horizon x (models-1): curve_i - curve_0
  double divergence_threshold = 0.0;
  std::string winner_at_end;  // model id, or "tie"

  std::string to_json(std::uint64_t config_hash, std::uint64_t seed) const;
};

/// Divergence threshold = multiplier x mean reconstruction-only MAE.
ComparisonReport compare_report(const std::vector<EnsembleErrorCurve>& curves,
                                double reconstruction_mae, double divergence_multiplier);

}  // namespace advrom
