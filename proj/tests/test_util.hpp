#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "advrom/linalg.hpp"

namespace testutil {

// Cyclic Jacobi eigenvalue iteration for symmetric matrices. Deliberately
// independent of the SVD backend so it can serve as an oracle for singular
// values: the eigenvalues of X^T X (or X X^T) are the squared singular
// values of X.
inline std::vector<double> jacobi_eigenvalues(advrom::Matrix a, int sweeps = 100,
                                              double tol = 1e-14) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < tol * tol) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

// Singular values of x through the Gram matrix route (smaller side).
inline std::vector<double> gram_singular_values(const advrom::Matrix& x) {
  const advrom::Matrix gram =
      x.rows() <= x.cols() ? advrom::Matrix(x * x.transpose()) : advrom::Matrix(x.transpose() * x);
  std::vector<double> eig = jacobi_eigenvalues(gram);
  for (double& v : eig) v = std::sqrt(std::max(v, 0.0));
  return eig;
}

inline bool all_equal(const advrom::Matrix& a, const advrom::Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

inline bool all_equal(const advrom::Vector& a, const advrom::Vector& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

// Fresh scratch directory per test case; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& label) {
    base_ = std::filesystem::temp_directory_path() /
            ("advrom_test_" + label + "_" + std::to_string(counter()++));
    std::filesystem::remove_all(base_);
    std::filesystem::create_directories(base_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(base_, ec);
  }
  const std::filesystem::path& path() const { return base_; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path base_;
};

}  // namespace testutil
