#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rcast/error.hpp"

namespace rcast {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

/// Largest eigenvalue modulus. Dense real Schur; reservoirs stay small enough.
inline double spectral_radius(const Matrix& m) {
  require(m.rows() == m.cols(), ErrorKind::dimension,
          "spectral_radius: matrix is not square (" + shape_str(m) + ")");
  require(m.rows() >= 1, ErrorKind::dimension, "spectral_radius: empty matrix");
  require(m.allFinite(), ErrorKind::domain, "spectral_radius: non-finite entries");
  if (m.rows() == 1) return std::abs(m(0, 0));
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  require(es.info() == Eigen::Success, ErrorKind::singular,
          "spectral_radius: eigenvalue iteration did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Ridge regression B = (F'F + r I)^{-1} F'Z via Cholesky of the regularized
/// normal equations.
inline Matrix ridge_solve(const Matrix& f, const Matrix& z, double r) {
  require(f.rows() >= 1 && f.cols() >= 1, ErrorKind::dimension, "ridge_solve: empty design");
  require(f.rows() == z.rows(), ErrorKind::dimension,
          "ridge_solve: design " + shape_str(f) + " vs response " + shape_str(z));
  require(r >= 0.0 && std::isfinite(r), ErrorKind::domain, "ridge_solve: penalty must be >= 0");
  Matrix gram = f.transpose() * f;
  gram.diagonal().array() += r;
  Eigen::LLT<Matrix> llt(gram);
  const bool singular = llt.info() != Eigen::Success || llt.rcond() < 1e-13;
  if (singular) {
    require(r > 0.0, ErrorKind::singular, "ridge_solve: F'F is singular and penalty is 0");
    // Positive penalty but rank-deficient enough to break Cholesky: fall back.
    return gram.ldlt().solve(f.transpose() * z);
  }
  return llt.solve(f.transpose() * z);
}

/// Principal-component basis of a column-centered data matrix.
struct PcaBasis {
  Matrix components;  // n x k, orthonormal columns
  Vector column_means;
  Vector singular_values;  // length k, descending

  Eigen::Index input_dim() const { return components.rows(); }
  Eigen::Index rank() const { return components.cols(); }
};

inline PcaBasis pca_fit(const Matrix& y, Eigen::Index k) {
  require(y.rows() >= 2, ErrorKind::dimension, "pca_fit: need at least 2 rows");
  require(k >= 1 && k <= std::min(y.rows(), y.cols()), ErrorKind::dimension,
          "pca_fit: k=" + std::to_string(k) + " out of range for " + shape_str(y));
  PcaBasis basis;
  basis.column_means = y.colwise().mean().transpose();
  const Matrix centered = y.rowwise() - basis.column_means.transpose();
  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  basis.components = svd.matrixV().leftCols(k);
  basis.singular_values = svd.singularValues().head(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < basis.components.rows(); ++i) {
      const double a = std::abs(basis.components(i, c));
      if (a > best * (1.0 + 1e-12) + 1e-300) {  // first index wins ties
        best = a;
        arg = i;
      }
    }
    if (basis.components(arg, c) < 0.0) basis.components.col(c) *= -1.0;
  }
  return basis;
}

inline Matrix pca_project(const PcaBasis& basis, const Matrix& y) {
  require(y.cols() == basis.input_dim(), ErrorKind::dimension,
          "pca_project: data has " + std::to_string(y.cols()) + " columns, basis expects " +
              std::to_string(basis.input_dim()));
  return (y.rowwise() - basis.column_means.transpose()) * basis.components;
}

/// Linear-interpolation quantile at rank (n-1)p ("type 7").
inline double quantile(std::span<const double> values, double p) {
  require(!values.empty(), ErrorKind::domain, "quantile: empty input");
  require(p >= 0.0 && p <= 1.0, ErrorKind::domain, "quantile: p outside [0,1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Column standardization statistics; zero-variance columns keep scale 1.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& x) {
    Standardizer s;
    s.mean = x.colwise().mean().transpose();
    s.scale.resize(x.cols());
    const double denom = std::max<double>(1.0, static_cast<double>(x.rows() - 1));
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double var = (x.col(c).array() - s.mean(c)).square().sum() / denom;
      s.scale(c) = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    return s;
  }

  Matrix apply(const Matrix& x) const {
    require(x.cols() == mean.size(), ErrorKind::dimension,
            "standardize: expected " + std::to_string(mean.size()) + " columns, got " +
                std::to_string(x.cols()));
    return ((x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array())
        .matrix();
  }
};

}  // namespace rcast
