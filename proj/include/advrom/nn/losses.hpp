#pragma once

#include "advrom/linalg.hpp"

namespace advrom::nn {

// Predictions are clamped to [kBceEps, 1 - kBceEps] before the logs so a
// saturated discriminator cannot produce an infinite loss.
constexpr double kBceEps = 1e-7;

/// Mean over elements of -[t ln p + (1-t) ln(1-p)]; targets are 0/1.
double bce_loss(const Matrix& predictions, const Matrix& targets);
double bce_loss(const Matrix& predictions, double target);

/// Mean of squared componentwise differences.
double mse_loss(const Matrix& a, const Matrix& b);

/// d(mse_loss)/da = 2 (a - b) / count.
Matrix mse_grad(const Matrix& a, const Matrix& b);

/// Gradient of bce_loss(sigmoid(logits), target) with respect to the logits:
/// (p - target) / count. Computed on logits so saturation keeps a usable
/// slope.
Matrix bce_logit_grad(const Matrix& probabilities, double target);

}  // namespace advrom::nn
