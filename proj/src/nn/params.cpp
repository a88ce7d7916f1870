#include "advrom/nn/params.hpp"

#include <cstring>

#include "advrom/errors.hpp"

namespace advrom::nn {

void ParameterSet::add(std::string name, Matrix& value, Matrix& grad) {
  if (value.rows() != grad.rows() || value.cols() != grad.cols()) {
    throw ArgumentError("parameter block \"" + name + "\": value/grad shape mismatch");
  }
  blocks_.push_back({std::move(name), value.data(), grad.data(), value.size()});
  total_ += value.size();
}

void ParameterSet::add(std::string name, Vector& value, Vector& grad) {
  if (value.size() != grad.size()) {
    throw ArgumentError("parameter block \"" + name + "\": value/grad shape mismatch");
  }
  blocks_.push_back({std::move(name), value.data(), grad.data(), value.size()});
  total_ += value.size();
}

Vector ParameterSet::flatten_values() const {
  Vector flat(total_);
  Eigen::Index offset = 0;
  for (const auto& b : blocks_) {
    std::memcpy(flat.data() + offset, b.value, static_cast<std::size_t>(b.size) * sizeof(double));
    offset += b.size;
  }
  return flat;
}

Vector ParameterSet::flatten_grads() const {
  Vector flat(total_);
  Eigen::Index offset = 0;
  for (const auto& b : blocks_) {
    std::memcpy(flat.data() + offset, b.grad, static_cast<std::size_t>(b.size) * sizeof(double));
    offset += b.size;
  }
  return flat;
}

void ParameterSet::assign_values(const Vector& flat) {
  if (flat.size() != total_) {
    throw ArgumentError("flat vector size " + std::to_string(flat.size()) +
                        " != parameter set size " + std::to_string(total_));
  }
  Eigen::Index offset = 0;
  for (const auto& b : blocks_) {
    std::memcpy(b.value, flat.data() + offset, static_cast<std::size_t>(b.size) * sizeof(double));
    offset += b.size;
  }
}

void ParameterSet::zero_grads() {
  for (const auto& b : blocks_) {
    std::memset(b.grad, 0, static_cast<std::size_t>(b.size) * sizeof(double));
  }
}

}  // namespace advrom::nn
