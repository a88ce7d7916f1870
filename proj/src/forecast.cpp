#include "advrom/forecast.hpp"

#include <cmath>
#include <limits>

#include "advrom/errors.hpp"
#include "advrom/io_util.hpp"
#include "json.hpp"

namespace advrom {

Vector TrueDeltaForecaster::predict_delta(const Matrix&, Eigen::Index abs_index) {
  if (abs_index + 1 >= series_->rows() || abs_index < 0) {
    throw ArgumentError("true-delta oracle index " + std::to_string(abs_index) +
                        " has no successor in the series");
  }
  return (series_->row(abs_index + 1) - series_->row(abs_index)).transpose();
}

RolloutResult rollout(LatentForecaster& model, const Matrix& seed_window, Eigen::Index start_index,
                      Eigen::Index horizon, const std::string& model_id) {
  if (horizon < 1) throw ArgumentError("roll-out horizon must be at least 1");
  if (seed_window.rows() < 1) throw ArgumentError("empty seed window");

  RolloutResult result;
  result.start_index = start_index;
  result.model_id = model_id;
  result.latent_trajectory.resize(horizon, seed_window.cols());

  Matrix window = seed_window;
  for (Eigen::Index h = 0; h < horizon; ++h) {
    const Vector delta = model.predict_delta(window, start_index + h);
    const Vector next = window.row(window.rows() - 1).transpose() + delta;
    if (!next.allFinite()) {
      result.divergence_step = h + 1;
      result.latent_trajectory.conservativeResize(h, Eigen::NoChange);
      return result;
    }
    result.latent_trajectory.row(h) = next.transpose();
    // Slide: drop the oldest entry, append the prediction.
    if (window.rows() > 1) {
      Matrix shifted(window.rows(), window.cols());
      shifted.topRows(window.rows() - 1) = window.bottomRows(window.rows() - 1);
      shifted.row(window.rows() - 1) = next.transpose();
      window = std::move(shifted);
    } else {
      window.row(0) = next.transpose();
    }
  }
  return result;
}

Matrix decode_to_physical(AAEModel& aae, const PCAModel& rom, const ScalingParams& scaling,
                          const Matrix& z_rows) {
  if (z_rows.cols() != aae.latent_dim()) {
    throw ArgumentError("decode-to-physical stage decoder: latent width " +
                        std::to_string(z_rows.cols()) + " != autoencoder latent " +
                        std::to_string(aae.latent_dim()));
  }
  const Matrix scaled = aae.decode(z_rows);
  if (scaled.cols() != scaling.dim()) {
    throw ArgumentError("decode-to-physical stage unscale: width " + std::to_string(scaled.cols()) +
                        " != scaling width " + std::to_string(scaling.dim()));
  }
  const Matrix pcs = unscale_scores(scaled, scaling);
  if (pcs.cols() != rom.rank()) {
    throw ArgumentError("decode-to-physical stage eof-expansion: width " +
                        std::to_string(pcs.cols()) + " != retained rank " +
                        std::to_string(rom.rank()));
  }
  Matrix out = pcs * rom.eofs;
  out.rowwise() += rom.mean.transpose();
  return out;
}

Vector decode_to_physical(AAEModel& aae, const PCAModel& rom, const ScalingParams& scaling,
                          const Vector& z) {
  return decode_to_physical(aae, rom, scaling, Matrix(z.transpose())).row(0).transpose();
}

void EnsembleErrorCurve::write_csv(const std::filesystem::path& path) const {
  std::vector<std::string> header = {"step", "mean", "std"};
  for (int c = 0; c < component_mae.cols(); ++c) {
    header.push_back("mae_" + component_label(layout, c));
  }
  io::CsvWriter csv(path, header);
  for (Eigen::Index h = 0; h < mean_mae.size(); ++h) {
    std::vector<double> row = {static_cast<double>(h + 1), mean_mae(h), std_mae(h)};
    for (Eigen::Index c = 0; c < component_mae.cols(); ++c) row.push_back(component_mae(h, c));
    csv.row(row);
  }
  csv.close();
}

namespace {

void validate_setup(const EvaluationSetup& setup, Eigen::Index series_length) {
  const Eigen::Index lo = setup.time_lag - 1;
  const Eigen::Index hi = series_length - 1 - setup.horizon;
  if (setup.start_count < 1) throw ArgumentError("start_count must be positive");
  if (setup.horizon < 1) throw ArgumentError("horizon must be positive");
  const Eigen::Index first = setup.start_begin;
  const Eigen::Index last = setup.start_begin + setup.start_count - 1;
  if (first < lo || last > hi) {
    throw ArgumentError("starts " + std::to_string(first) + ".." + std::to_string(last) +
                        " out of range; feasible starts are " + std::to_string(lo) + ".." +
                        std::to_string(hi) + " for series length " + std::to_string(series_length) +
                        ", time lag " + std::to_string(setup.time_lag) + ", horizon " +
                        std::to_string(setup.horizon));
  }
}

// Aggregates raw per-start curves into mean/std and per-component means.
EnsembleErrorCurve aggregate(std::string model_id, const Matrix& per_start,
                             const std::vector<Matrix>& per_start_components,
                             const std::vector<Eigen::Index>& starts, ComponentLayout layout) {
  EnsembleErrorCurve curve;
  curve.model_id = std::move(model_id);
  curve.layout = layout;
  curve.starts = starts;
  curve.per_start_mae = per_start;
  const Eigen::Index horizon = per_start.cols();
  const auto count = static_cast<double>(per_start.rows());
  curve.mean_mae = per_start.colwise().mean().transpose();
  curve.std_mae.resize(horizon);
  for (Eigen::Index h = 0; h < horizon; ++h) {
    const double mean = curve.mean_mae(h);
    double acc = 0.0;
    for (Eigen::Index s = 0; s < per_start.rows(); ++s) {
      const double d = per_start(s, h) - mean;
      acc += d * d;
    }
    curve.std_mae(h) = std::sqrt(acc / count);
  }
  const int n_components = component_count(layout);
  curve.component_mae = Matrix::Zero(horizon, n_components);
  for (const Matrix& comp : per_start_components) curve.component_mae += comp;
  curve.component_mae /= count;
  return curve;
}

}  // namespace

EnsembleErrorCurve ensemble_evaluate(LatentForecaster& model, const std::string& model_id,
                                     AAEModel& aae, const PCAModel& rom,
                                     const ScalingParams& scaling, const Matrix& latents,
                                     const SnapshotMatrix& truth, const EvaluationSetup& setup) {
  if (latents.rows() != truth.steps()) {
    throw ArgumentError("latent series length != snapshot count");
  }
  validate_setup(setup, latents.rows());

  const int n_components = component_count(truth.layout());
  Matrix per_start(setup.start_count, setup.horizon);
  std::vector<Matrix> per_start_components;
  per_start_components.reserve(static_cast<std::size_t>(setup.start_count));
  std::vector<Eigen::Index> starts;
  starts.reserve(static_cast<std::size_t>(setup.start_count));

  for (Eigen::Index i = 0; i < setup.start_count; ++i) {
    const Eigen::Index start = setup.start_begin + i;
    starts.push_back(start);
    const Matrix seed = latents.middleRows(start - setup.time_lag + 1, setup.time_lag);
    const RolloutResult rolled = rollout(model, seed, start, setup.horizon, model_id);
    if (rolled.divergence_step >= 0) {
      throw NumericError("roll-out from start " + std::to_string(start) +
                         " produced a non-finite latent at step " +
                         std::to_string(rolled.divergence_step));
    }
    const Matrix decoded = decode_to_physical(aae, rom, scaling, rolled.latent_trajectory);
    Matrix components(setup.horizon, n_components);
    for (Eigen::Index h = 0; h < setup.horizon; ++h) {
      const auto diff = (decoded.row(h) - truth.data().row(start + 1 + h)).cwiseAbs();
      per_start(i, h) = diff.mean();
      for (int c = 0; c < n_components; ++c) {
        const auto [begin, end] = truth.component_range(c);
        components(h, c) = diff.segment(begin, end - begin).mean();
      }
    }
    per_start_components.push_back(std::move(components));
  }
  return aggregate(model_id, per_start, per_start_components, starts, truth.layout());
}

EnsembleErrorCurve reconstruction_only_curve(AAEModel& aae, const PCAModel& rom,
                                             const ScalingParams& scaling, const Matrix& latents,
                                             const SnapshotMatrix& truth,
                                             const EvaluationSetup& setup) {
  if (latents.rows() != truth.steps()) {
    throw ArgumentError("latent series length != snapshot count");
  }
  validate_setup(setup, latents.rows());

  const int n_components = component_count(truth.layout());
  Matrix per_start(setup.start_count, setup.horizon);
  std::vector<Matrix> per_start_components;
  std::vector<Eigen::Index> starts;
  for (Eigen::Index i = 0; i < setup.start_count; ++i) {
    const Eigen::Index start = setup.start_begin + i;
    starts.push_back(start);
    const Matrix decoded =
        decode_to_physical(aae, rom, scaling, latents.middleRows(start + 1, setup.horizon));
    Matrix components(setup.horizon, n_components);
    for (Eigen::Index h = 0; h < setup.horizon; ++h) {
      const auto diff = (decoded.row(h) - truth.data().row(start + 1 + h)).cwiseAbs();
      per_start(i, h) = diff.mean();
      for (int c = 0; c < n_components; ++c) {
        const auto [begin, end] = truth.component_range(c);
        components(h, c) = diff.segment(begin, end - begin).mean();
      }
    }
    per_start_components.push_back(std::move(components));
  }
  return aggregate("reconstruction", per_start, per_start_components, starts, truth.layout());
}

ComparisonReport compare_report(const std::vector<EnsembleErrorCurve>& curves,
                                double reconstruction_mae, double divergence_multiplier) {
  if (curves.size() < 2) throw ArgumentError("comparison needs at least two curves");
  const Eigen::Index horizon = curves.front().mean_mae.size();
  for (const auto& c : curves) {
    if (c.mean_mae.size() != horizon) {
      throw ArgumentError("curve \"" + c.model_id + "\" horizon " +
                          std::to_string(c.mean_mae.size()) + " != " + std::to_string(horizon));
    }
  }

  ComparisonReport report;
  report.divergence_threshold = divergence_multiplier * reconstruction_mae;
  report.step_differences.resize(horizon, static_cast<Eigen::Index>(curves.size()) - 1);
  for (std::size_t i = 1; i < curves.size(); ++i) {
    report.step_differences.col(static_cast<Eigen::Index>(i - 1)) =
        curves[i].mean_mae - curves[0].mean_mae;
  }

  double best = std::numeric_limits<double>::infinity();
  bool tie = false;
  for (const auto& c : curves) {
    ModelComparison mc;
    mc.model_id = c.model_id;
    mc.mae_at_end = c.mean_mae(horizon - 1);
    for (Eigen::Index h = 0; h < horizon; ++h) {
      if (c.mean_mae(h) > report.divergence_threshold) {
        mc.divergence_step = h + 1;
        break;
      }
    }
    report.models.push_back(mc);
    if (mc.mae_at_end < best) {
      best = mc.mae_at_end;
      report.winner_at_end = c.model_id;
      tie = false;
    } else if (mc.mae_at_end == best) {
      tie = true;
    }
  }
  if (tie) report.winner_at_end = "tie";
  return report;
}

std::string ComparisonReport::to_json(std::uint64_t config_hash, std::uint64_t seed) const {
  nlohmann::json j;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["divergence_threshold"] = divergence_threshold;
  j["winner_at_end"] = winner_at_end;
  j["models"] = nlohmann::json::array();
  for (const auto& m : models) {
    j["models"].push_back({{"model", m.model_id},
                           {"mae_at_end", m.mae_at_end},
                           {"divergence_step", m.divergence_step}});
  }
  j["step_differences"] = nlohmann::json::array();
  for (Eigen::Index h = 0; h < step_differences.rows(); ++h) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < step_differences.cols(); ++c) row.push_back(step_differences(h, c));
    j["step_differences"].push_back(row);
  }
  return j.dump(2);
}

}  // namespace advrom
