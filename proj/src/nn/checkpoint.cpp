#include "advrom/nn/checkpoint.hpp"

#include <numeric>

#include "advrom/errors.hpp"
#include "advrom/io_util.hpp"

namespace advrom::nn {

namespace {

constexpr std::string_view kNnMagic = "ROMNN1";

void write_tensor(std::ostream& out, const TensorRecord& t) {
  io::write_string(out, t.name);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
  std::uint64_t expected = 1;
  for (const auto d : t.dims) {
    io::write_le<std::uint64_t>(out, d);
    expected *= d;
  }
  if (expected != t.data.size()) {
    throw ArgumentError("tensor \"" + t.name + "\": dims do not match payload size");
  }
  io::write_f64_block(out, t.data.data(), t.data.size());
}

TensorRecord read_tensor(std::istream& in) {
  TensorRecord t;
  t.name = io::read_string(in, "tensor name");
  const auto ndims = io::read_le<std::uint32_t>(in, "tensor rank");
  t.dims.resize(ndims);
  std::uint64_t count = 1;
  for (auto& d : t.dims) {
    d = io::read_le<std::uint64_t>(in, "tensor dims");
    count *= d;
  }
  t.data.resize(count);
  io::read_f64_block(in, t.data.data(), count, "tensor payload of " + t.name);
  return t;
}

TensorRecord tensor_from_matrix(std::string name, const Matrix& m) {
  TensorRecord t;
  t.name = std::move(name);
  t.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
  t.data.resize(static_cast<std::size_t>(m.size()));
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) t.data[k++] = m(i, j);
  }
  return t;
}

TensorRecord tensor_from_vector(std::string name, const Vector& v) {
  TensorRecord t;
  t.name = std::move(name);
  t.dims = {static_cast<std::uint64_t>(v.size())};
  t.data.assign(v.data(), v.data() + v.size());
  return t;
}

void matrix_from_tensor(const TensorRecord& t, Matrix& m) {
  if (t.dims.size() != 2 || static_cast<Eigen::Index>(t.dims[0]) != m.rows() ||
      static_cast<Eigen::Index>(t.dims[1]) != m.cols()) {
    throw IoError("tensor \"" + t.name + "\": shape mismatch against model architecture");
  }
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = t.data[k++];
  }
}

void vector_from_tensor(const TensorRecord& t, Vector& v) {
  if (t.dims.size() != 1 || static_cast<Eigen::Index>(t.dims[0]) != v.size()) {
    throw IoError("tensor \"" + t.name + "\": shape mismatch against model architecture");
  }
  std::copy(t.data.begin(), t.data.end(), v.data());
}

const TensorRecord& find_tensor(const LayerRecord& record, std::string_view suffix) {
  for (const auto& t : record.tensors) {
    if (t.name.size() >= suffix.size() &&
        t.name.compare(t.name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return t;
    }
  }
  throw IoError("layer \"" + record.name + "\": missing tensor \"" + std::string(suffix) + "\"");
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  auto out = io::open_out_binary(path);
  io::write_magic(out, kNnMagic);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.model_kind));
  io::write_string(out, ckpt.manifest_json);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.layers.size()));
  for (const auto& layer : ckpt.layers) {
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(layer.kind));
    io::write_string(out, layer.name);
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(layer.tensors.size()));
    for (const auto& t : layer.tensors) write_tensor(out, t);
  }
  io::write_le<std::uint8_t>(out, ckpt.has_optimizer_state ? 1 : 0);
  if (ckpt.has_optimizer_state) {
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.optimizer_state.size()));
    for (const auto& t : ckpt.optimizer_state) write_tensor(out, t);
  }
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  auto in = io::open_in_binary(path);
  if (in.peek() == std::ifstream::traits_type::eof()) {
    throw IoError(path.string() + ": empty input");
  }
  io::expect_magic(in, kNnMagic, path.string());
  Checkpoint ckpt;
  ckpt.model_kind = static_cast<ModelKind>(io::read_le<std::uint32_t>(in, "model kind"));
  ckpt.manifest_json = io::read_string(in, "manifest");
  const auto n_layers = io::read_le<std::uint32_t>(in, "layer count");
  ckpt.layers.resize(n_layers);
  for (auto& layer : ckpt.layers) {
    layer.kind = static_cast<LayerKind>(io::read_le<std::uint32_t>(in, "layer kind"));
    layer.name = io::read_string(in, "layer name");
    const auto n_tensors = io::read_le<std::uint32_t>(in, "tensor count");
    layer.tensors.resize(n_tensors);
    for (auto& t : layer.tensors) t = read_tensor(in);
  }
  ckpt.has_optimizer_state = io::read_le<std::uint8_t>(in, "optimizer flag") != 0;
  if (ckpt.has_optimizer_state) {
    const auto n = io::read_le<std::uint32_t>(in, "optimizer tensor count");
    ckpt.optimizer_state.resize(n);
    for (auto& t : ckpt.optimizer_state) t = read_tensor(in);
  }
  return ckpt;
}

LayerRecord pack_dense(const DenseLayer& layer, const std::string& name) {
  LayerRecord record{LayerKind::kDense, name, {}};
  record.tensors.push_back(tensor_from_matrix(name + ".w", layer.weights()));
  record.tensors.push_back(tensor_from_vector(name + ".b", layer.bias()));
  return record;
}

void unpack_dense(DenseLayer& layer, const LayerRecord& record) {
  if (record.kind != LayerKind::kDense) throw IoError("layer \"" + record.name + "\": not a dense layer");
  matrix_from_tensor(find_tensor(record, ".w"), layer.weights());
  vector_from_tensor(find_tensor(record, ".b"), layer.bias());
}

LayerRecord pack_batchnorm(const BatchNormLayer& layer, const std::string& name) {
  LayerRecord record{LayerKind::kBatchNorm, name, {}};
  record.tensors.push_back(tensor_from_vector(name + ".gamma", layer.gamma()));
  record.tensors.push_back(tensor_from_vector(name + ".beta", layer.beta()));
  record.tensors.push_back(tensor_from_vector(name + ".running_mean", layer.running_mean()));
  record.tensors.push_back(tensor_from_vector(name + ".running_var", layer.running_var()));
  return record;
}

void unpack_batchnorm(BatchNormLayer& layer, const LayerRecord& record) {
  if (record.kind != LayerKind::kBatchNorm) {
    throw IoError("layer \"" + record.name + "\": not a batch norm layer");
  }
  vector_from_tensor(find_tensor(record, ".gamma"), layer.gamma());
  vector_from_tensor(find_tensor(record, ".beta"), layer.beta());
  vector_from_tensor(find_tensor(record, ".running_mean"), layer.running_mean());
  vector_from_tensor(find_tensor(record, ".running_var"), layer.running_var());
}

LayerRecord pack_lstm(const LSTMLayer& layer, const std::string& name) {
  static const char* kGateNames[4] = {"i", "f", "o", "g"};
  LayerRecord record{LayerKind::kLstm, name, {}};
  for (int g = 0; g < 4; ++g) {
    record.tensors.push_back(
        tensor_from_matrix(name + ".w" + kGateNames[g], layer.gate_weights(g)));
    record.tensors.push_back(tensor_from_vector(name + ".b" + kGateNames[g], layer.gate_bias(g)));
  }
  return record;
}

void unpack_lstm(LSTMLayer& layer, const LayerRecord& record) {
  static const char* kGateNames[4] = {"i", "f", "o", "g"};
  if (record.kind != LayerKind::kLstm) throw IoError("layer \"" + record.name + "\": not an lstm layer");
  for (int g = 0; g < 4; ++g) {
    matrix_from_tensor(find_tensor(record, std::string(".w") + kGateNames[g]),
                       layer.gate_weights(g));
    vector_from_tensor(find_tensor(record, std::string(".b") + kGateNames[g]), layer.gate_bias(g));
  }
}

}  // namespace advrom::nn
