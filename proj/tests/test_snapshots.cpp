#include <fstream>

#include "advrom/errors.hpp"
#include "advrom/snapshots.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace advrom;

namespace {

SyntheticFlowConfig small_config(int n_modes, double noise, std::uint64_t seed) {
  SyntheticFlowConfig cfg;
  cfg.grid_nx = 8;
  cfg.grid_ny = 8;
  cfg.n_steps = 60;
  cfg.n_modes = n_modes;
  cfg.noise_amplitude = noise;
  cfg.seed = seed;
  return cfg;
}

Matrix centered(const Matrix& data) {
  return data.rowwise() - Vector(data.colwise().mean().transpose()).transpose();
}

}  // namespace

TEST_CASE("synthetic generation is a pure function of its config") {
  const auto cfg = small_config(3, 0.05, 17);
  const SnapshotMatrix a = generate_synthetic_flow(cfg);
  const SnapshotMatrix b = generate_synthetic_flow(cfg);
  CHECK(a.data() == b.data());
  CHECK(a.dt() == b.dt());

  auto other = cfg;
  other.seed = 18;
  CHECK(generate_synthetic_flow(other).data() != a.data());
}

TEST_CASE("grid 16x16 with 300 steps yields n=300, m=512") {
  SyntheticFlowConfig cfg;
  cfg.grid_nx = 16;
  cfg.grid_ny = 16;
  cfg.n_steps = 300;
  cfg.n_modes = 4;
  cfg.seed = 1;
  const SnapshotMatrix x = generate_synthetic_flow(cfg);
  CHECK(x.steps() == 300);
  CHECK(x.state_dim() == 512);
  CHECK(x.layout() == ComponentLayout::kComponentMajorUV);
}

TEST_CASE("single mode without noise stays on one spatial pattern") {
  const SnapshotMatrix x = generate_synthetic_flow(small_config(1, 0.0, 5));
  // Every snapshot is a multiple of the first one.
  const Vector base = x.data().row(0).transpose();
  REQUIRE(base.norm() > 0.0);
  for (Eigen::Index t = 1; t < x.steps(); ++t) {
    const Vector row = x.data().row(t).transpose();
    const double alpha = row.dot(base) / base.squaredNorm();
    CHECK((row - alpha * base).norm() <= 1e-10 * row.norm());
  }

  // Centered rank is at most 2: singular values below 1e-8 of the largest,
  // checked through the Gram-matrix oracle as well.
  const Matrix c = centered(x.data());
  const auto oracle = testutil::gram_singular_values(c);
  REQUIRE(oracle.size() >= 3);
  CHECK(oracle[2] <= 1e-8 * oracle[0]);
}

TEST_CASE("centered rank is at most twice the mode count") {
  for (const std::uint64_t seed : {2ULL, 9ULL, 33ULL}) {
    for (const int k : {1, 2, 3}) {
      auto cfg = small_config(k, 0.0, seed);
      const SnapshotMatrix x = generate_synthetic_flow(cfg);
      const auto sv = testutil::gram_singular_values(centered(x.data()));
      REQUIRE(static_cast<int>(sv.size()) > 2 * k);
      CHECK(sv[static_cast<std::size_t>(2 * k)] <= 1e-8 * sv[0]);
    }
  }
}

TEST_CASE("noise-free fields are temporally smooth") {
  const SnapshotMatrix x = generate_synthetic_flow(small_config(4, 0.0, 11));
  CHECK(lag1_autocorrelation(x) > 0.9);
}

TEST_CASE("binary round-trip is bit exact") {
  testutil::TempDir dir("snap_roundtrip");
  Matrix data(3, 4);
  data << 0.1, -2.5, 3.25, 1e-300, 7.0, 0.0, -0.0, 123456.789, 1.0 / 3.0, -1e300, 42.0, 5e-324;
  const SnapshotMatrix x(data, 0.25, ComponentLayout::kComponentMajorUV);
  const auto file = dir.path() / "x.romsnap";
  save_snapshots(x, file);
  const SnapshotMatrix y = load_snapshots(file);
  CHECK(y.data() == x.data());
  CHECK(y.dt() == x.dt());
  CHECK(y.layout() == x.layout());
}

TEST_CASE("loader rejects broken files with precise messages") {
  testutil::TempDir dir("snap_errors");

  SUBCASE("empty file") {
    const auto file = dir.path() / "empty.romsnap";
    std::ofstream(file).close();
    CHECK_THROWS_WITH_AS(load_snapshots(file), doctest::Contains("empty input"), IoError);
  }

  SUBCASE("wrong magic") {
    const auto file = dir.path() / "bad.romsnap";
    std::ofstream out(file, std::ios::binary);
    out << "NOTMAGIC and then some bytes";
    out.close();
    CHECK_THROWS_WITH_AS(load_snapshots(file), doctest::Contains("malformed header"), IoError);
  }

  SUBCASE("truncated payload") {
    const auto file = dir.path() / "short.romsnap";
    Matrix data = Matrix::Ones(3, 4);
    save_snapshots(SnapshotMatrix(data, 0.1, ComponentLayout::kScalar), file);
    std::filesystem::resize_file(file, std::filesystem::file_size(file) - 9);
    CHECK_THROWS_AS(load_snapshots(file), IoError);
  }

  SUBCASE("non-finite value names row and column") {
    const auto file = dir.path() / "nan.romsnap";
    Matrix data = Matrix::Ones(3, 4);
    save_snapshots(SnapshotMatrix(data, 0.1, ComponentLayout::kScalar), file);
    // Patch the value at row 1, column 2 with a NaN.
    std::fstream f(file, std::ios::binary | std::ios::in | std::ios::out);
    const std::size_t header = 8 + 8 + 8 + 8 + 4;
    const std::size_t offset = header + (1 * 4 + 2) * sizeof(double);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    f.seekp(static_cast<std::streamoff>(offset));
    f.write(reinterpret_cast<const char*>(&nan), sizeof(nan));
    f.close();
    CHECK_THROWS_WITH_AS(load_snapshots(file), doctest::Contains("row 1, column 2"), IoError);
  }

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_snapshots(dir.path() / "nope.romsnap"), IoError);
  }
}

TEST_CASE("csv export writes the documented header and time stamps") {
  testutil::TempDir dir("snap_csv");
  Matrix data(2, 3);
  data << 1, 2, 3, 4, 5, 6;
  const SnapshotMatrix x(data, 0.5, ComponentLayout::kScalar);
  const auto file = dir.path() / "x.csv";
  export_snapshots_csv(x, file);

  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,c0,c1,c2");
  std::getline(in, line);
  CHECK(line == "0,1,2,3");
  std::getline(in, line);
  CHECK(line == "0.5,4,5,6");
}

TEST_CASE("construction validates shape, dt, and finiteness") {
  CHECK_THROWS_AS(SnapshotMatrix(Matrix::Ones(1, 4), 0.1, ComponentLayout::kScalar), ArgumentError);
  CHECK_THROWS_AS(SnapshotMatrix(Matrix::Ones(3, 4), 0.0, ComponentLayout::kScalar), ArgumentError);
  CHECK_THROWS_AS(SnapshotMatrix(Matrix::Ones(3, 3), 0.1, ComponentLayout::kComponentMajorUV),
                  ArgumentError);
  Matrix bad = Matrix::Ones(3, 4);
  bad(2, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS(SnapshotMatrix(bad, 0.1, ComponentLayout::kScalar),
                       doctest::Contains("row 2, column 1"), NumericError);
}

TEST_CASE("config validation lists every violation") {
  SyntheticFlowConfig cfg;
  cfg.grid_nx = 0;
  cfg.n_steps = 1;
  cfg.noise_amplitude = -1.0;
  try {
    cfg.validate();
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("grid_nx") != std::string::npos);
    CHECK(msg.find("n_steps") != std::string::npos);
    CHECK(msg.find("noise_amplitude") != std::string::npos);
  }
}
