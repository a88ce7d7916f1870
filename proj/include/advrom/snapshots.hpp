#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "advrom/linalg.hpp"

namespace advrom {

// How physical velocity components are flattened into state columns.
enum class ComponentLayout : std::uint32_t {
  kScalar = 0,           // one generic component spanning all columns
  kComponentMajorUV = 1,  // all u values, then all v values
};

int component_count(ComponentLayout layout);
std::string component_label(ComponentLayout layout, int component);

/// Time-resolved field data: rows are time steps, columns are state entries
/// (velocities in m/s). Immutable after construction.
class SnapshotMatrix {
 public:
  SnapshotMatrix(Matrix data, double dt, ComponentLayout layout);

  const Matrix& data() const { return data_; }
  Eigen::Index steps() const { return data_.rows(); }
  Eigen::Index state_dim() const { return data_.cols(); }
  double dt() const { return dt_; }
  ComponentLayout layout() const { return layout_; }

  double time_of(Eigen::Index step) const { return static_cast<double>(step) * dt_; }

  // Half-open column range holding one physical component.
  std::pair<Eigen::Index, Eigen::Index> component_range(int component) const;

 private:
  Matrix data_;
  double dt_;
  ComponentLayout layout_;
};

struct SyntheticFlowConfig {
  int grid_nx = 16;
  int grid_ny = 16;
  int n_steps = 300;
  int n_modes = 8;
  std::uint64_t seed = 0;
  double noise_amplitude = 0.0;
  double dt = 0.1;

  void validate() const;  // throws ConfigError listing every violation
};

/// Builds a 2-D velocity corpus as a superposition of vortex cells with
/// smoothly varying amplitudes. The first cell pulsates in place; the others
/// rotate between two offset swirl patterns, so the centered matrix has
/// numerical rank at most 2 * n_modes.
SnapshotMatrix generate_synthetic_flow(const SyntheticFlowConfig& cfg);

// Lag-1 temporal autocorrelation of the centered field (diagnostic).
double lag1_autocorrelation(const SnapshotMatrix& x);

// Binary persistence, magic "ROMSNAP1". Round-trips are bit exact.
void save_snapshots(const SnapshotMatrix& x, const std::filesystem::path& path);
SnapshotMatrix load_snapshots(const std::filesystem::path& path);

// CSV export: header row `t,c0,...,c{m-1}`, one row per step.
void export_snapshots_csv(const SnapshotMatrix& x, const std::filesystem::path& path);

}  // namespace advrom
