#include "advrom/snapshots.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "advrom/errors.hpp"
#include "advrom/io_util.hpp"
#include "advrom/rng.hpp"

namespace advrom {

namespace {

constexpr std::string_view kSnapshotMagic = "ROMSNAP1";
constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

int component_count(ComponentLayout layout) {
  return layout == ComponentLayout::kComponentMajorUV ? 2 : 1;
}

std::string component_label(ComponentLayout layout, int component) {
  if (layout == ComponentLayout::kComponentMajorUV) return component == 0 ? "u" : "v";
  return "c" + std::to_string(component);
}

SnapshotMatrix::SnapshotMatrix(Matrix data, double dt, ComponentLayout layout)
    : data_(std::move(data)), dt_(dt), layout_(layout) {
  if (data_.rows() < 2 || data_.cols() < 1) {
    throw ArgumentError("snapshot matrix needs n >= 2 steps and m >= 1 columns, got " +
                        std::to_string(data_.rows()) + "x" + std::to_string(data_.cols()));
  }
  if (!(dt_ > 0.0)) throw ArgumentError("snapshot dt must be positive");
  if (layout_ == ComponentLayout::kComponentMajorUV && data_.cols() % 2 != 0) {
    throw ArgumentError("component-major u,v layout needs an even column count");
  }
  for (Eigen::Index i = 0; i < data_.rows(); ++i) {
    for (Eigen::Index j = 0; j < data_.cols(); ++j) {
      if (!std::isfinite(data_(i, j))) {
        throw NumericError("non-finite snapshot value at row " + std::to_string(i) + ", column " +
                           std::to_string(j));
      }
    }
  }
}

std::pair<Eigen::Index, Eigen::Index> SnapshotMatrix::component_range(int component) const {
  const int count = component_count(layout_);
  if (component < 0 || component >= count) {
    throw ArgumentError("component index " + std::to_string(component) + " out of range");
  }
  const Eigen::Index width = data_.cols() / count;
  return {width * component, width * (component + 1)};
}

void SyntheticFlowConfig::validate() const {
  std::vector<std::string> problems;
  if (grid_nx < 1) problems.push_back("grid_nx must be positive");
  if (grid_ny < 1) problems.push_back("grid_ny must be positive");
  if (n_steps < 2) problems.push_back("n_steps must be at least 2");
  if (n_modes < 1) problems.push_back("n_modes must be positive");
  if (!(noise_amplitude >= 0.0)) problems.push_back("noise_amplitude must be non-negative");
  if (!(dt > 0.0)) problems.push_back("dt must be positive");
  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid synthetic flow config:";
    for (const auto& p : problems) msg << "\n  - " << p;
    throw ConfigError(msg.str());
  }
}

SnapshotMatrix generate_synthetic_flow(const SyntheticFlowConfig& cfg) {
  cfg.validate();
  const Eigen::Index cells = static_cast<Eigen::Index>(cfg.grid_nx) * cfg.grid_ny;
  const Eigen::Index m = 2 * cells;
  const Eigen::Index n = cfg.n_steps;

  Rng rng = Rng(cfg.seed).derive("synthetic-flow");

  struct Mode {
    Vector pattern_a;  // swirl pattern, u then v
    Vector pattern_b;  // offset swirl the mode rotates into
    double strength;
    double omega;      // rad/s rotation between the two patterns
    double phase;
    double mod_depth;  // relative amplitude modulation
    double mod_omega;
    double mod_phase;
  };

  auto swirl = [&](double cx, double cy, double core) {
    Vector field(m);
    for (int iy = 0; iy < cfg.grid_ny; ++iy) {
      for (int ix = 0; ix < cfg.grid_nx; ++ix) {
        const Eigen::Index cell = static_cast<Eigen::Index>(iy) * cfg.grid_nx + ix;
        const double x = cfg.grid_nx > 1 ? static_cast<double>(ix) / (cfg.grid_nx - 1) : 0.5;
        const double y = cfg.grid_ny > 1 ? static_cast<double>(iy) / (cfg.grid_ny - 1) : 0.5;
        const double dx = x - cx;
        const double dy = y - cy;
        const double envelope = std::exp(-(dx * dx + dy * dy) / (2.0 * core * core));
        field(cell) = -dy / core * envelope;          // u
        field(cells + cell) = dx / core * envelope;   // v
      }
    }
    return field;
  };

  std::vector<Mode> modes;
  modes.reserve(static_cast<std::size_t>(cfg.n_modes));
  for (int k = 0; k < cfg.n_modes; ++k) {
    Mode mode;
    const double cx = rng.uniform(0.18, 0.82);
    const double cy = rng.uniform(0.18, 0.82);
    const double core = rng.uniform(0.09, 0.20);
    mode.pattern_a = swirl(cx, cy, core);
    const double offset_angle = rng.uniform(0.0, kTwoPi);
    const double offset = 0.6 * core;
    mode.pattern_b = swirl(cx + offset * std::cos(offset_angle), cy + offset * std::sin(offset_angle), core);
    mode.strength = rng.uniform(0.8, 1.2) * std::pow(static_cast<double>(k + 1), -0.35);
    const double rot_period_steps = rng.uniform(60.0, 180.0);
    // The first cell pulsates without rotating, so with n_modes = 1 every
    // snapshot is a scalar multiple of one fixed pattern.
    mode.omega = k == 0 ? 0.0 : kTwoPi / (rot_period_steps * cfg.dt);
    mode.phase = rng.uniform(0.0, kTwoPi);
    mode.mod_depth = rng.uniform(0.10, 0.25);
    const double mod_period_steps = rng.uniform(90.0, 260.0);
    mode.mod_omega = kTwoPi / (mod_period_steps * cfg.dt);
    mode.mod_phase = rng.uniform(0.0, kTwoPi);
    modes.push_back(std::move(mode));
  }

  Matrix data = Matrix::Zero(n, m);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double time = static_cast<double>(t) * cfg.dt;
    for (const Mode& mode : modes) {
      const double amp =
          mode.strength * (1.0 + mode.mod_depth * std::sin(mode.mod_omega * time + mode.mod_phase));
      const double theta = mode.omega * time + mode.phase;
      const double ca = amp * std::cos(theta);
      const double cb = amp * std::sin(theta);
      data.row(t).noalias() += ca * mode.pattern_a.transpose() + cb * mode.pattern_b.transpose();
    }
  }

  if (cfg.noise_amplitude > 0.0) {
    for (Eigen::Index t = 0; t < n; ++t) {
      for (Eigen::Index j = 0; j < m; ++j) {
        data(t, j) += cfg.noise_amplitude * rng.normal();
      }
    }
  }

  return SnapshotMatrix(std::move(data), cfg.dt, ComponentLayout::kComponentMajorUV);
}

double lag1_autocorrelation(const SnapshotMatrix& x) {
  const Matrix& d = x.data();
  const Vector mean = d.colwise().mean().transpose();
  const Matrix centered = d.rowwise() - mean.transpose();
  double cross = 0.0;
  double norm = 0.0;
  for (Eigen::Index t = 0; t + 1 < centered.rows(); ++t) {
    cross += centered.row(t).dot(centered.row(t + 1));
    norm += centered.row(t).squaredNorm();
  }
  if (norm <= 0.0) return 1.0;  // constant-in-time field
  return cross / norm;
}

void save_snapshots(const SnapshotMatrix& x, const std::filesystem::path& path) {
  auto out = io::open_out_binary(path);
  io::write_magic(out, kSnapshotMagic);
  io::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(x.steps()));
  io::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(x.state_dim()));
  io::write_le<double>(out, x.dt());
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(x.layout()));
  io::write_matrix_rowmajor(out, x.data());
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

SnapshotMatrix load_snapshots(const std::filesystem::path& path) {
  auto in = io::open_in_binary(path);
  if (in.peek() == std::ifstream::traits_type::eof()) {
    throw IoError(path.string() + ": empty input");
  }
  io::expect_magic(in, kSnapshotMagic, path.string());
  const auto n = io::read_le<std::uint64_t>(in, "snapshot row count");
  const auto m = io::read_le<std::uint64_t>(in, "snapshot column count");
  const auto dt = io::read_le<double>(in, "snapshot dt");
  const auto layout_tag = io::read_le<std::uint32_t>(in, "snapshot layout tag");
  if (n < 2 || m < 1) {
    throw IoError(path.string() + ": dimension mismatch, header says " + std::to_string(n) + "x" +
                  std::to_string(m));
  }
  if (layout_tag > static_cast<std::uint32_t>(ComponentLayout::kComponentMajorUV)) {
    throw IoError(path.string() + ": unknown layout tag " + std::to_string(layout_tag));
  }
  Matrix data = io::read_matrix_rowmajor(in, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m),
                                         "snapshot values");
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      if (!std::isfinite(data(i, j))) {
        throw IoError(path.string() + ": non-finite value at row " + std::to_string(i) + ", column " +
                      std::to_string(j));
      }
    }
  }
  if (!(dt > 0.0)) throw IoError(path.string() + ": non-positive dt in header");
  return SnapshotMatrix(std::move(data), dt, static_cast<ComponentLayout>(layout_tag));
}

void export_snapshots_csv(const SnapshotMatrix& x, const std::filesystem::path& path) {
  std::vector<std::string> header;
  header.reserve(static_cast<std::size_t>(x.state_dim()) + 1);
  header.push_back("t");
  for (Eigen::Index j = 0; j < x.state_dim(); ++j) header.push_back("c" + std::to_string(j));
  io::CsvWriter csv(path, header);
  std::vector<double> row(static_cast<std::size_t>(x.state_dim()) + 1);
  for (Eigen::Index i = 0; i < x.steps(); ++i) {
    row[0] = x.time_of(i);
    for (Eigen::Index j = 0; j < x.state_dim(); ++j) row[static_cast<std::size_t>(j) + 1] = x.data()(i, j);
    csv.row(row);
  }
  csv.close();
}

}  // namespace advrom
