#include "advrom/rom.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "advrom/errors.hpp"
#include "advrom/io_util.hpp"

namespace advrom {

namespace {

constexpr std::string_view kRomMagic = "ROMPCA1";

// Flip each EOF row so its largest-magnitude entry is positive (ties: first
// such entry), keeping fitted models reproducible across SVD backends.
void fix_signs(Matrix& eofs, Matrix& scores) {
  for (Eigen::Index i = 0; i < eofs.rows(); ++i) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index j = 0; j < eofs.cols(); ++j) {
      const double mag = std::abs(eofs(i, j));
      if (mag > best) {
        best = mag;
        arg = j;
      }
    }
    if (eofs(i, arg) < 0.0) {
      eofs.row(i) = -eofs.row(i);
      if (scores.size() > 0) scores.col(i) = -scores.col(i);
    }
  }
}

}  // namespace

PCAModel fit_pca(const SnapshotMatrix& x) {
  const Matrix& data = x.data();
  const Eigen::Index n = data.rows();
  const Eigen::Index m = data.cols();

  PCAModel model;
  model.mean = data.colwise().mean().transpose();
  model.dt = x.dt();
  model.layout = x.layout();

  const Matrix centered = data.rowwise() - model.mean.transpose();
  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (!svd.singularValues().allFinite()) {
    throw NumericError("singular value decomposition produced non-finite values");
  }

  const Eigen::Index r = std::min(n - 1, m);
  model.singular_values = svd.singularValues().head(r);
  model.eofs = svd.matrixV().leftCols(r).transpose();
  model.scores = svd.matrixU().leftCols(r) * model.singular_values.asDiagonal();
  fix_signs(model.eofs, model.scores);
  return model;
}

SnapshotMatrix reconstruct(const PCAModel& model, const Matrix& scores, Eigen::Index tau) {
  if (tau < 0 || tau > model.rank()) {
    throw ArgumentError("truncation level " + std::to_string(tau) + " out of range [0, " +
                        std::to_string(model.rank()) + "]");
  }
  if (scores.cols() != tau) {
    throw ArgumentError("score matrix has " + std::to_string(scores.cols()) + " columns, expected " +
                        std::to_string(tau));
  }
  Matrix out = Matrix::Zero(scores.rows(), model.state_dim());
  if (tau > 0) out.noalias() = scores * model.eofs.topRows(tau);
  out.rowwise() += model.mean.transpose();
  return SnapshotMatrix(std::move(out), model.dt, model.layout);
}

Matrix project(const PCAModel& model, const Matrix& states, Eigen::Index tau) {
  if (states.cols() != model.state_dim()) {
    throw ArgumentError("state width " + std::to_string(states.cols()) + " != model state width " +
                        std::to_string(model.state_dim()));
  }
  if (tau < 0 || tau > model.rank()) {
    throw ArgumentError("truncation level " + std::to_string(tau) + " out of range [0, " +
                        std::to_string(model.rank()) + "]");
  }
  return (states.rowwise() - model.mean.transpose()) * model.eofs.topRows(tau).transpose();
}

ScalingParams fit_scaling(const Matrix& scores) {
  ScalingParams params;
  params.col_min = scores.colwise().minCoeff().transpose();
  params.col_max = scores.colwise().maxCoeff().transpose();
  params.constant.resize(static_cast<std::size_t>(scores.cols()));
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    params.constant[static_cast<std::size_t>(j)] = params.col_max(j) == params.col_min(j);
  }
  return params;
}

namespace {

void check_scaling_width(const Matrix& scores, const ScalingParams& params) {
  if (scores.cols() != params.dim()) {
    throw ArgumentError("score width " + std::to_string(scores.cols()) + " != scaling width " +
                        std::to_string(params.dim()));
  }
}

}  // namespace

Matrix scale_scores(const Matrix& scores, const ScalingParams& params) {
  check_scaling_width(scores, params);
  Matrix out(scores.rows(), scores.cols());
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    if (params.constant[static_cast<std::size_t>(j)]) {
      out.col(j).setZero();
    } else {
      const double span = params.col_max(j) - params.col_min(j);
      out.col(j) = 2.0 * (scores.col(j).array() - params.col_min(j)) / span - 1.0;
    }
  }
  return out;
}

Matrix unscale_scores(const Matrix& scaled, const ScalingParams& params) {
  check_scaling_width(scaled, params);
  Matrix out(scaled.rows(), scaled.cols());
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    if (params.constant[static_cast<std::size_t>(j)]) {
      out.col(j).setConstant(params.col_min(j));
    } else {
      const double span = params.col_max(j) - params.col_min(j);
      out.col(j) = (scaled.col(j).array() + 1.0) * 0.5 * span + params.col_min(j);
    }
  }
  return out;
}

void save_rom(const RomArtifact& artifact, const std::filesystem::path& path) {
  const PCAModel& model = artifact.model;
  if (artifact.scaling.dim() != model.rank()) {
    throw ArgumentError("scaling width != model rank in rom artifact");
  }
  auto out = io::open_out_binary(path);
  io::write_magic(out, kRomMagic);
  io::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(model.state_dim()));
  io::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(model.rank()));
  io::write_le<std::uint64_t>(out, artifact.n_train);
  io::write_le<double>(out, model.dt);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.layout));
  io::write_f64_block(out, model.mean.data(), static_cast<std::size_t>(model.mean.size()));
  io::write_matrix_rowmajor(out, model.eofs);
  io::write_f64_block(out, model.singular_values.data(),
                      static_cast<std::size_t>(model.singular_values.size()));
  io::write_f64_block(out, artifact.scaling.col_min.data(),
                      static_cast<std::size_t>(artifact.scaling.col_min.size()));
  io::write_f64_block(out, artifact.scaling.col_max.data(),
                      static_cast<std::size_t>(artifact.scaling.col_max.size()));
  for (Eigen::Index j = 0; j < artifact.scaling.dim(); ++j) {
    io::write_le<std::uint8_t>(out, artifact.scaling.constant[static_cast<std::size_t>(j)] ? 1 : 0);
  }
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

RomArtifact load_rom(const std::filesystem::path& path) {
  auto in = io::open_in_binary(path);
  if (in.peek() == std::ifstream::traits_type::eof()) {
    throw IoError(path.string() + ": empty input");
  }
  io::expect_magic(in, kRomMagic, path.string());
  const auto m = io::read_le<std::uint64_t>(in, "rom state width");
  const auto r = io::read_le<std::uint64_t>(in, "rom rank");
  const auto n_train = io::read_le<std::uint64_t>(in, "rom train row count");
  const auto dt = io::read_le<double>(in, "rom dt");
  const auto layout_tag = io::read_le<std::uint32_t>(in, "rom layout tag");
  if (m < 1 || r < 1 || r > m) {
    throw IoError(path.string() + ": dimension mismatch in header");
  }

  RomArtifact artifact;
  artifact.n_train = n_train;
  PCAModel& model = artifact.model;
  model.dt = dt;
  model.layout = static_cast<ComponentLayout>(layout_tag);
  model.mean.resize(static_cast<Eigen::Index>(m));
  io::read_f64_block(in, model.mean.data(), m, "rom mean");
  model.eofs = io::read_matrix_rowmajor(in, static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(m),
                                        "rom eofs");
  model.singular_values.resize(static_cast<Eigen::Index>(r));
  io::read_f64_block(in, model.singular_values.data(), r, "rom singular values");
  artifact.scaling.col_min.resize(static_cast<Eigen::Index>(r));
  artifact.scaling.col_max.resize(static_cast<Eigen::Index>(r));
  io::read_f64_block(in, artifact.scaling.col_min.data(), r, "rom scaling minima");
  io::read_f64_block(in, artifact.scaling.col_max.data(), r, "rom scaling maxima");
  artifact.scaling.constant.resize(r);
  for (std::uint64_t j = 0; j < r; ++j) {
    artifact.scaling.constant[j] = io::read_le<std::uint8_t>(in, "rom scaling flags") != 0;
  }
  return artifact;
}

void export_scores_csv(const Matrix& scores, double dt, const std::filesystem::path& path) {
  std::vector<std::string> header;
  header.reserve(static_cast<std::size_t>(scores.cols()) + 1);
  header.push_back("t");
  for (Eigen::Index j = 0; j < scores.cols(); ++j) header.push_back("pc" + std::to_string(j));
  io::CsvWriter csv(path, header);
  std::vector<double> row(static_cast<std::size_t>(scores.cols()) + 1);
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    row[0] = static_cast<double>(i) * dt;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) row[static_cast<std::size_t>(j) + 1] = scores(i, j);
    csv.row(row);
  }
  csv.close();
}

}  // namespace advrom
