#pragma once

// Test-side helpers: a generator independent of the library RNG, and brute
// force oracles the library results are compared against.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double unif(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double norm(double mean = 0.0, double sd = 1.0) { return std::normal_distribution<double>(mean, sd)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }

  Matrix matrix(Eigen::Index r, Eigen::Index c, double sd = 1.0) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = norm(0.0, sd);
    return m;
  }

  Matrix sparse(Eigen::Index n, double density) {
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (unif() < density) m(i, j) = unif(-1.0, 1.0);
    return m;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

inline double max_abs(const Matrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

// max |eigenvalue| from the complex Schur-based solver
inline double eig_radius(const Matrix& m) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m.cast<std::complex<double>>());
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// (F'F + rI)^{-1} F'Z with an explicit LU inverse
inline Matrix ridge_inverse(const Matrix& f, const Matrix& z, double r) {
  const Matrix g = f.transpose() * f + r * Matrix::Identity(f.cols(), f.cols());
  return g.fullPivLu().inverse() * (f.transpose() * z);
}

// eigenvalues of the centered scatter matrix, descending
inline Vector scatter_eigenvalues(const Matrix& y) {
  const Matrix c = y.rowwise() - y.colwise().mean();
  Eigen::SelfAdjointEigenSolver<Matrix> es(c.transpose() * c);
  return es.eigenvalues().reverse();
}

inline Matrix scatter_eigenvectors(const Matrix& y) {
  const Matrix c = y.rowwise() - y.colwise().mean();
  Eigen::SelfAdjointEigenSolver<Matrix> es(c.transpose() * c);
  return es.eigenvectors().rowwise().reverse();
}

// double-loop CRPS
inline double crps_naive(const std::vector<double>& x, double z) {
  const double n = static_cast<double>(x.size());
  double a = 0.0, b = 0.0;
  for (double xi : x) a += std::abs(xi - z);
  for (double xi : x)
    for (double xj : x) b += std::abs(xi - xj);
  return a / n - b / (2.0 * n * n);
}

// type-7 quantile by direct rank arithmetic
inline double quantile_naive(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - std::floor(h)) * (v[hi] - v[lo]);
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("rcast_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing_support
