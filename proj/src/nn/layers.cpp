#include "advrom/nn/layers.hpp"

#include <cmath>

#include "advrom/errors.hpp"

namespace advrom::nn {

Matrix leaky_relu(const Matrix& x, double slope) {
  return x.unaryExpr([slope](double v) { return v >= 0.0 ? v : slope * v; });
}

Vector leaky_relu(const Vector& x, double slope) {
  return x.unaryExpr([slope](double v) { return v >= 0.0 ? v : slope * v; });
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace {

Matrix sigmoid_m(const Matrix& x) {
  return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Matrix tanh_m(const Matrix& x) {
  return x.unaryExpr([](double v) { return std::tanh(v); });
}

void glorot_fill(Matrix& w, Rng& rng, Eigen::Index fan_in, Eigen::Index fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      w(i, j) = rng.uniform(-limit, limit);
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseLayer

DenseLayer::DenseLayer(Eigen::Index in_dim, Eigen::Index out_dim)
    : w_(Matrix::Zero(out_dim, in_dim)),
      b_(Vector::Zero(out_dim)),
      dw_(Matrix::Zero(out_dim, in_dim)),
      db_(Vector::Zero(out_dim)) {
  if (in_dim < 1 || out_dim < 1) throw ArgumentError("dense layer dimensions must be positive");
}

void DenseLayer::init_glorot(Rng& rng) { glorot_fill(w_, rng, in_dim(), out_dim()); }

Matrix DenseLayer::forward(const Matrix& x, bool record) {
  if (x.cols() != in_dim()) {
    throw ArgumentError("dense input width " + std::to_string(x.cols()) + " != layer input width " +
                        std::to_string(in_dim()));
  }
  if (record) {
    x_cache_ = x;
    recorded_ = true;
  }
  Matrix y = x * w_.transpose();
  y.rowwise() += b_.transpose();
  return y;
}

Vector DenseLayer::forward(const Vector& x) const {
  if (x.size() != in_dim()) {
    throw ArgumentError("dense input width " + std::to_string(x.size()) + " != layer input width " +
                        std::to_string(in_dim()));
  }
  return w_ * x + b_;
}

Matrix DenseLayer::backward(const Matrix& dy) {
  if (!recorded_) throw StateError("dense backward called without a recorded forward pass");
  if (dy.rows() != x_cache_.rows() || dy.cols() != out_dim()) {
    throw ArgumentError("dense backward shape mismatch");
  }
  dw_.noalias() += dy.transpose() * x_cache_;
  db_.noalias() += dy.colwise().sum().transpose();
  return dy * w_;
}

void DenseLayer::register_params(ParameterSet& set, const std::string& prefix) {
  set.add(prefix + ".w", w_, dw_);
  set.add(prefix + ".b", b_, db_);
}

// ---------------------------------------------------------------------------
// BatchNormLayer

BatchNormLayer::BatchNormLayer(Eigen::Index features, double epsilon, double momentum)
    : gamma_(Vector::Ones(features)),
      beta_(Vector::Zero(features)),
      dgamma_(Vector::Zero(features)),
      dbeta_(Vector::Zero(features)),
      running_mean_(Vector::Zero(features)),
      running_var_(Vector::Ones(features)),
      epsilon_(epsilon),
      momentum_(momentum) {
  if (features < 1) throw ArgumentError("batch norm feature count must be positive");
  if (!(epsilon > 0.0)) throw ArgumentError("batch norm epsilon must be positive");
  if (!(momentum > 0.0 && momentum < 1.0)) throw ArgumentError("batch norm momentum must be in (0,1)");
}

Matrix BatchNormLayer::forward(const Matrix& x, Mode mode, bool record) {
  if (x.cols() != features()) {
    throw ArgumentError("batch norm input width " + std::to_string(x.cols()) + " != feature count " +
                        std::to_string(features()));
  }
  Vector mean(features());
  Vector var(features());
  if (mode == Mode::kTrain) {
    if (x.rows() < 2) {
      throw ArgumentError("batch norm train mode needs batch size >= 2, got " +
                          std::to_string(x.rows()));
    }
    mean = x.colwise().mean().transpose();
    var = (x.rowwise() - mean.transpose()).array().square().colwise().mean().matrix().transpose();
    running_mean_ = momentum_ * running_mean_ + (1.0 - momentum_) * mean;
    running_var_ = momentum_ * running_var_ + (1.0 - momentum_) * var;
  } else {
    mean = running_mean_;
    var = running_var_;
  }
  const Vector inv_std = (var.array() + epsilon_).sqrt().inverse();
  Matrix xhat = (x.rowwise() - mean.transpose()) * inv_std.asDiagonal();
  if (record) {
    xhat_ = xhat;
    inv_std_ = inv_std;
    cached_mode_ = mode;
    recorded_ = true;
  }
  Matrix y = xhat * gamma_.asDiagonal();
  y.rowwise() += beta_.transpose();
  return y;
}

Matrix BatchNormLayer::backward(const Matrix& dy) {
  if (!recorded_) throw StateError("batch norm backward called without a recorded forward pass");
  if (dy.rows() != xhat_.rows() || dy.cols() != features()) {
    throw ArgumentError("batch norm backward shape mismatch");
  }
  dgamma_.noalias() += (dy.array() * xhat_.array()).colwise().sum().matrix().transpose();
  dbeta_.noalias() += dy.colwise().sum().transpose();

  const Matrix dxhat = dy * gamma_.asDiagonal();
  if (cached_mode_ == Mode::kInfer) {
    // Running statistics are constants here.
    return dxhat * inv_std_.asDiagonal();
  }
  const double batch = static_cast<double>(dy.rows());
  const Vector sum_dxhat = dxhat.colwise().sum().transpose();
  const Vector sum_dxhat_xhat = (dxhat.array() * xhat_.array()).colwise().sum().matrix().transpose();
  Matrix dx = batch * dxhat;
  dx.rowwise() -= sum_dxhat.transpose();
  dx -= xhat_ * sum_dxhat_xhat.asDiagonal();
  dx *= (1.0 / batch);
  return dx * inv_std_.asDiagonal();
}

void BatchNormLayer::register_params(ParameterSet& set, const std::string& prefix) {
  set.add(prefix + ".gamma", gamma_, dgamma_);
  set.add(prefix + ".beta", beta_, dbeta_);
}

// ---------------------------------------------------------------------------
// DropoutLayer

DropoutLayer::DropoutLayer(double rate) : rate_(rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ArgumentError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
}

Matrix DropoutLayer::forward(const Matrix& x, Mode mode, Rng& rng, bool record) {
  if (mode == Mode::kInfer || rate_ == 0.0) {
    if (record) {
      identity_ = true;
      recorded_ = true;
    }
    return x;
  }
  const double keep_scale = 1.0 / (1.0 - rate_);
  Matrix mask(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      mask(i, j) = rng.uniform() < rate_ ? 0.0 : keep_scale;
    }
  }
  if (record) {
    mask_ = mask;
    identity_ = false;
    recorded_ = true;
  }
  return x.cwiseProduct(mask);
}

Matrix DropoutLayer::backward(const Matrix& dy) {
  if (!recorded_) throw StateError("dropout backward called without a recorded forward pass");
  if (identity_) return dy;
  if (dy.rows() != mask_.rows() || dy.cols() != mask_.cols()) {
    throw ArgumentError("dropout backward shape mismatch");
  }
  return dy.cwiseProduct(mask_);
}

Matrix dropout_forward(const Matrix& x, double rate, Mode mode, Rng& rng) {
  DropoutLayer layer(rate);
  return layer.forward(x, mode, rng);
}

// ---------------------------------------------------------------------------
// LSTMLayer

LSTMLayer::LSTMLayer(Eigen::Index input_dim, Eigen::Index hidden_dim)
    : input_dim_(input_dim), hidden_dim_(hidden_dim) {
  if (input_dim < 1 || hidden_dim < 1) throw ArgumentError("lstm dimensions must be positive");
  for (int g = 0; g < 4; ++g) {
    w_[g] = Matrix::Zero(hidden_dim, input_dim + hidden_dim);
    b_[g] = Vector::Zero(hidden_dim);
    dw_[g] = Matrix::Zero(hidden_dim, input_dim + hidden_dim);
    db_[g] = Vector::Zero(hidden_dim);
  }
}

void LSTMLayer::init_glorot(Rng& rng) {
  for (int g = 0; g < 4; ++g) {
    glorot_fill(w_[g], rng, input_dim_ + hidden_dim_, hidden_dim_);
  }
  b_[0].setZero();
  b_[1].setOnes();  // forget gate starts open
  b_[2].setZero();
  b_[3].setZero();
}

Matrix LSTMLayer::forward(const std::vector<Matrix>& xs, bool record) {
  if (xs.empty()) throw ArgumentError("lstm forward needs a non-empty sequence");
  const Eigen::Index batch = xs.front().rows();
  if (record) {
    cache_.clear();
    cache_.reserve(xs.size());
    recorded_ = true;
  }
  Matrix h = Matrix::Zero(batch, hidden_dim_);
  Matrix c = Matrix::Zero(batch, hidden_dim_);
  for (const Matrix& x : xs) {
    if (x.cols() != input_dim_ || x.rows() != batch) {
      throw ArgumentError("lstm input step shape mismatch");
    }
    Matrix concat(batch, input_dim_ + hidden_dim_);
    concat << x, h;
    Matrix gate_i = concat * w_[0].transpose();
    gate_i.rowwise() += b_[0].transpose();
    gate_i = sigmoid_m(gate_i);
    Matrix gate_f = concat * w_[1].transpose();
    gate_f.rowwise() += b_[1].transpose();
    gate_f = sigmoid_m(gate_f);
    Matrix gate_o = concat * w_[2].transpose();
    gate_o.rowwise() += b_[2].transpose();
    gate_o = sigmoid_m(gate_o);
    Matrix gate_g = concat * w_[3].transpose();
    gate_g.rowwise() += b_[3].transpose();
    gate_g = tanh_m(gate_g);

    Matrix c_next = gate_f.cwiseProduct(c) + gate_i.cwiseProduct(gate_g);
    Matrix tanh_c = tanh_m(c_next);
    Matrix h_next = gate_o.cwiseProduct(tanh_c);
    if (record) {
      cache_.push_back({std::move(concat), std::move(gate_i), std::move(gate_f), std::move(gate_o),
                        std::move(gate_g), c, c_next, tanh_c});
    }
    c = std::move(c_next);
    h = std::move(h_next);
  }
  return h;
}

std::vector<Matrix> LSTMLayer::backward(const Matrix& dh_last) {
  if (!recorded_ || cache_.empty()) {
    throw StateError("lstm backward called without a recorded forward pass");
  }
  const Eigen::Index batch = cache_.front().concat.rows();
  if (dh_last.rows() != batch || dh_last.cols() != hidden_dim_) {
    throw ArgumentError("lstm backward shape mismatch");
  }
  std::vector<Matrix> dxs(cache_.size());
  Matrix dh = dh_last;
  Matrix dc = Matrix::Zero(batch, hidden_dim_);
  for (std::size_t s = cache_.size(); s-- > 0;) {
    const StepCache& st = cache_[s];
    const Matrix d_o = dh.cwiseProduct(st.tanh_c);
    dc += dh.cwiseProduct(st.gate_o)
              .cwiseProduct(Matrix::Ones(batch, hidden_dim_) - st.tanh_c.cwiseProduct(st.tanh_c));
    const Matrix d_f = dc.cwiseProduct(st.c_prev);
    const Matrix d_i = dc.cwiseProduct(st.gate_g);
    const Matrix d_g = dc.cwiseProduct(st.gate_i);

    const Matrix dpre_i =
        d_i.cwiseProduct(st.gate_i).cwiseProduct(Matrix::Ones(batch, hidden_dim_) - st.gate_i);
    const Matrix dpre_f =
        d_f.cwiseProduct(st.gate_f).cwiseProduct(Matrix::Ones(batch, hidden_dim_) - st.gate_f);
    const Matrix dpre_o =
        d_o.cwiseProduct(st.gate_o).cwiseProduct(Matrix::Ones(batch, hidden_dim_) - st.gate_o);
    const Matrix dpre_g =
        d_g.cwiseProduct(Matrix::Ones(batch, hidden_dim_) - st.gate_g.cwiseProduct(st.gate_g));

    dw_[0].noalias() += dpre_i.transpose() * st.concat;
    dw_[1].noalias() += dpre_f.transpose() * st.concat;
    dw_[2].noalias() += dpre_o.transpose() * st.concat;
    dw_[3].noalias() += dpre_g.transpose() * st.concat;
    db_[0].noalias() += dpre_i.colwise().sum().transpose();
    db_[1].noalias() += dpre_f.colwise().sum().transpose();
    db_[2].noalias() += dpre_o.colwise().sum().transpose();
    db_[3].noalias() += dpre_g.colwise().sum().transpose();

    Matrix dconcat = dpre_i * w_[0];
    dconcat.noalias() += dpre_f * w_[1];
    dconcat.noalias() += dpre_o * w_[2];
    dconcat.noalias() += dpre_g * w_[3];

    dxs[s] = dconcat.leftCols(input_dim_);
    dh = dconcat.rightCols(hidden_dim_);
    dc = dc.cwiseProduct(st.gate_f);
  }
  return dxs;
}

void LSTMLayer::register_params(ParameterSet& set, const std::string& prefix) {
  static const char* kGateNames[4] = {"i", "f", "o", "g"};
  for (int g = 0; g < 4; ++g) {
    set.add(prefix + ".w" + kGateNames[g], w_[g], dw_[g]);
    set.add(prefix + ".b" + kGateNames[g], b_[g], db_[g]);
  }
}

std::pair<Vector, Vector> lstm_step(const LSTMLayer& layer, const Vector& x, const Vector& h,
                                    const Vector& c) {
  if (x.size() != layer.input_dim() || h.size() != layer.hidden_dim() ||
      c.size() != layer.hidden_dim()) {
    throw ArgumentError("lstm step shape mismatch");
  }
  Vector concat(x.size() + h.size());
  concat << x, h;
  const auto gate = [&](int g) { return layer.gate_weights(g) * concat + layer.gate_bias(g); };
  const Vector i = gate(0).unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  const Vector f = gate(1).unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  const Vector o = gate(2).unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  const Vector g = gate(3).unaryExpr([](double v) { return std::tanh(v); });
  Vector c_next = f.cwiseProduct(c) + i.cwiseProduct(g);
  Vector h_next = o.cwiseProduct(c_next.unaryExpr([](double v) { return std::tanh(v); }));
  return {std::move(h_next), std::move(c_next)};
}

}  // namespace advrom::nn
