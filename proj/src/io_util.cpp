#include "advrom/io_util.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>

namespace advrom::io {

bool host_is_little_endian() {
  const std::uint16_t probe = 0x1;
  unsigned char first;
  std::memcpy(&first, &probe, 1);
  return first == 1;
}

namespace {

template <typename T>
void byte_swap(T& value) {
  auto* p = reinterpret_cast<unsigned char*>(&value);
  std::reverse(p, p + sizeof(T));
}

}  // namespace

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  if (!host_is_little_endian()) byte_swap(value);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
  if (!out) throw IoError("binary write failed");
}

template <typename T>
T read_le(std::istream& in, const std::string& what) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("truncated input while reading " + what);
  if (!host_is_little_endian()) byte_swap(value);
  return value;
}

template void write_le<std::uint8_t>(std::ostream&, std::uint8_t);
template void write_le<std::uint32_t>(std::ostream&, std::uint32_t);
template void write_le<std::uint64_t>(std::ostream&, std::uint64_t);
template void write_le<double>(std::ostream&, double);
template std::uint8_t read_le<std::uint8_t>(std::istream&, const std::string&);
template std::uint32_t read_le<std::uint32_t>(std::istream&, const std::string&);
template std::uint64_t read_le<std::uint64_t>(std::istream&, const std::string&);
template double read_le<double>(std::istream&, const std::string&);

void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!out) throw IoError("binary write failed");
}

void expect_magic(std::istream& in, std::string_view magic, const std::string& path) {
  std::string buf(magic.size(), '\0');
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!in) {
    if (in.gcount() == 0) throw IoError(path + ": empty input");
    throw IoError(path + ": truncated header");
  }
  if (buf != magic) {
    throw IoError(path + ": malformed header, expected magic \"" + std::string(magic) + "\"");
  }
}

void write_f64_block(std::ostream& out, const double* data, std::size_t count) {
  if (host_is_little_endian()) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    if (!out) throw IoError("binary write failed");
    return;
  }
  for (std::size_t i = 0; i < count; ++i) write_le(out, data[i]);
}

void read_f64_block(std::istream& in, double* data, std::size_t count, const std::string& what) {
  if (host_is_little_endian()) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw IoError("truncated input while reading " + what);
    return;
  }
  for (std::size_t i = 0; i < count; ++i) data[i] = read_le<double>(in, what);
}

void write_matrix_rowmajor(std::ostream& out, const Matrix& m) {
  std::vector<double> row(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    write_f64_block(out, row.data(), row.size());
  }
}

Matrix read_matrix_rowmajor(std::istream& in, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  Matrix m(rows, cols);
  std::vector<double> row(static_cast<std::size_t>(cols));
  for (Eigen::Index i = 0; i < rows; ++i) {
    read_f64_block(in, row.data(), row.size(), what);
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return m;
}

void write_string(std::ostream& out, std::string_view s) {
  write_le<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!out) throw IoError("binary write failed");
}

std::string read_string(std::istream& in, const std::string& what) {
  const auto len = read_le<std::uint64_t>(in, what);
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw IoError("truncated input while reading " + what);
  return s;
}

std::ofstream open_out_binary(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

std::string format_f64(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64_bytes(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot hash missing file: " + path.string());
  std::uint64_t h = 1469598103934665603ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    const auto got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : columns_(header.size()), path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::trunc);
  if (!out_) throw IoError("cannot open for writing: " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) {
    throw ArgumentError("csv row width " + std::to_string(values.size()) + " != header width " +
                        std::to_string(columns_) + " in " + path_.string());
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << format_f64(values[i]);
  }
  out_ << '\n';
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) {
    throw ArgumentError("csv row width " + std::to_string(cells.size()) + " != header width " +
                        std::to_string(columns_) + " in " + path_.string());
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void CsvWriter::close() {
  if (out_.is_open()) {
    out_.flush();
    if (!out_) throw IoError("write failed: " + path_.string());
    out_.close();
  }
}

}  // namespace advrom::io
