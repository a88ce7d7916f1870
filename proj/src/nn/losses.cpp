#include "advrom/nn/losses.hpp"

#include <algorithm>
#include <cmath>

#include "advrom/errors.hpp"

namespace advrom::nn {

namespace {

double bce_term(double p, double t) {
  const double clamped = std::clamp(p, kBceEps, 1.0 - kBceEps);
  return -(t * std::log(clamped) + (1.0 - t) * std::log(1.0 - clamped));
}

}  // namespace

double bce_loss(const Matrix& predictions, const Matrix& targets) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
    throw ArgumentError("bce shape mismatch");
  }
  if (predictions.size() == 0) throw ArgumentError("bce on empty input");
  double total = 0.0;
  for (Eigen::Index i = 0; i < predictions.rows(); ++i) {
    for (Eigen::Index j = 0; j < predictions.cols(); ++j) {
      total += bce_term(predictions(i, j), targets(i, j));
    }
  }
  return total / static_cast<double>(predictions.size());
}

double bce_loss(const Matrix& predictions, double target) {
  if (predictions.size() == 0) throw ArgumentError("bce on empty input");
  double total = 0.0;
  for (Eigen::Index i = 0; i < predictions.rows(); ++i) {
    for (Eigen::Index j = 0; j < predictions.cols(); ++j) {
      total += bce_term(predictions(i, j), target);
    }
  }
  return total / static_cast<double>(predictions.size());
}

double mse_loss(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ArgumentError("mse shape mismatch");
  if (a.size() == 0) throw ArgumentError("mse on empty input");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

Matrix mse_grad(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ArgumentError("mse shape mismatch");
  return 2.0 / static_cast<double>(a.size()) * (a - b);
}

Matrix bce_logit_grad(const Matrix& probabilities, double target) {
  return (probabilities.array() - target).matrix() / static_cast<double>(probabilities.size());
}

}  // namespace advrom::nn
