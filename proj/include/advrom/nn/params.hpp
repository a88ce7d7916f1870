#pragma once

#include <string>
#include <vector>

#include "advrom/linalg.hpp"

namespace advrom::nn {

// One contiguous block of trainable values with its gradient buffer.
// Non-owning; the layer keeps the storage and must not resize it while
// registered.
struct ParamBlock {
  std::string name;
  double* value = nullptr;
  double* grad = nullptr;
  Eigen::Index size = 0;
};

/// Ordered registry of parameter blocks. The block order defines the flat
/// vector layout the optimizer and the gradient checker operate on.
class ParameterSet {
 public:
  void add(std::string name, Matrix& value, Matrix& grad);
  void add(std::string name, Vector& value, Vector& grad);

  Eigen::Index total_size() const { return total_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }

  Vector flatten_values() const;
  Vector flatten_grads() const;
  void assign_values(const Vector& flat);
  void zero_grads();

 private:
  std::vector<ParamBlock> blocks_;
  Eigen::Index total_ = 0;
};

}  // namespace advrom::nn
