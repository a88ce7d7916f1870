#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "advrom/errors.hpp"
#include "advrom/linalg.hpp"

namespace advrom::io {

// All binary formats are little-endian on disk.

bool host_is_little_endian();

template <typename T>
void write_le(std::ostream& out, T value);

template <typename T>
T read_le(std::istream& in, const std::string& what);

void write_magic(std::ostream& out, std::string_view magic);
void expect_magic(std::istream& in, std::string_view magic, const std::string& path);

void write_f64_block(std::ostream& out, const double* data, std::size_t count);
void read_f64_block(std::istream& in, double* data, std::size_t count, const std::string& what);

// Row-major on disk regardless of Eigen's in-memory layout.
void write_matrix_rowmajor(std::ostream& out, const Matrix& m);
Matrix read_matrix_rowmajor(std::istream& in, Eigen::Index rows, Eigen::Index cols, const std::string& what);

void write_string(std::ostream& out, std::string_view s);
std::string read_string(std::istream& in, const std::string& what);

std::ofstream open_out_binary(const std::filesystem::path& path);
std::ifstream open_in_binary(const std::filesystem::path& path);

// Shortest round-trip decimal rendering; identical output for identical bits.
std::string format_f64(double x);

// FNV-1a over a byte stream; used for artifact hashes in manifests.
std::uint64_t fnv1a64_bytes(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

// Minimal CSV emitter: one header row, then data rows, '\n' line endings.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void raw_row(const std::vector<std::string>& cells);
  void close();

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::filesystem::path path_;
};

}  // namespace advrom::io
