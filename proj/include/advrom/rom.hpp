#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "advrom/linalg.hpp"
#include "advrom/snapshots.hpp"

namespace advrom {

/// PCA factorization of a snapshot corpus: data = scores * eofs + mean.
/// EOF rows are orthonormal; scores columns are mutually orthogonal and
/// ordered by non-increasing singular value. Immutable after fit.
struct PCAModel {
  Vector mean;             // temporal mean of the training rows
  Matrix eofs;             // r x m, rows orthonormal
  Matrix scores;           // n x r training scores (empty on a loaded model)
  Vector singular_values;  // length r, non-increasing
  double dt = 0.0;
  ComponentLayout layout = ComponentLayout::kScalar;

  Eigen::Index rank() const { return eofs.rows(); }
  Eigen::Index state_dim() const { return eofs.cols(); }
};

/// Per-column affine map taking training scores onto [-1, 1].
struct ScalingParams {
  Vector col_min;
  Vector col_max;
  std::vector<bool> constant;  // max == min, mapped to 0

  Eigen::Index dim() const { return col_min.size(); }
};

PCAModel fit_pca(const SnapshotMatrix& x);

/// x_tau = scores * eofs(1..tau) + mean. `scores` must have tau columns.
SnapshotMatrix reconstruct(const PCAModel& model, const Matrix& scores, Eigen::Index tau);

/// (states - mean) * eofs(1..tau)^T for rows of new data in physical space.
Matrix project(const PCAModel& model, const Matrix& states, Eigen::Index tau);

ScalingParams fit_scaling(const Matrix& scores);
Matrix scale_scores(const Matrix& scores, const ScalingParams& params);
Matrix unscale_scores(const Matrix& scaled, const ScalingParams& params);

// Model persistence, magic "ROMPCA1". Training scores are not stored; they
// are recoverable by projecting the corpus.
struct RomArtifact {
  PCAModel model;
  ScalingParams scaling;
  std::uint64_t n_train = 0;  // rows the fit and scaling were computed from
};

void save_rom(const RomArtifact& artifact, const std::filesystem::path& path);
RomArtifact load_rom(const std::filesystem::path& path);

// CSV export of a score time series: header `t,pc0,...`, one row per step.
void export_scores_csv(const Matrix& scores, double dt, const std::filesystem::path& path);

}  // namespace advrom
