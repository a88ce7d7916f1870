#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "advrom/nn/layers.hpp"

namespace advrom::nn {

enum class LayerKind : std::uint32_t { kDense = 1, kBatchNorm = 2, kLstm = 3 };

enum class ModelKind : std::uint32_t { kAutoencoder = 1, kForecaster = 2 };

struct TensorRecord {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<double> data;
};

struct LayerRecord {
  LayerKind kind;
  std::string name;
  std::vector<TensorRecord> tensors;
};

/// Section-tagged binary model container, magic "ROMNN1": a JSON manifest
/// describing the architecture, one section per layer with shapes and f64
/// parameters, and optionally the optimizer moments.
struct Checkpoint {
  ModelKind model_kind;
  std::string manifest_json;
  std::vector<LayerRecord> layers;
  bool has_optimizer_state = false;
  std::vector<TensorRecord> optimizer_state;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Layer <-> record packing. Loaders validate shapes against the constructed
// layer and throw IoError on mismatch.
LayerRecord pack_dense(const DenseLayer& layer, const std::string& name);
void unpack_dense(DenseLayer& layer, const LayerRecord& record);
LayerRecord pack_batchnorm(const BatchNormLayer& layer, const std::string& name);
void unpack_batchnorm(BatchNormLayer& layer, const LayerRecord& record);
LayerRecord pack_lstm(const LSTMLayer& layer, const std::string& name);
void unpack_lstm(LSTMLayer& layer, const LayerRecord& record);

}  // namespace advrom::nn
