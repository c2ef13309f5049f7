#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rcast/error.hpp"
#include "rcast/numerics.hpp"

namespace rcast {

inline double mspe(const Matrix& pred, const Matrix& truth) {
  require(pred.rows() == truth.rows() && pred.cols() == truth.cols(), ErrorKind::dimension,
          "mspe: shapes " + shape_str(pred) + " and " + shape_str(truth) + " differ");
  require(truth.size() > 0, ErrorKind::dimension, "mspe: empty input");
  return (pred - truth).squaredNorm() / static_cast<double>(truth.size());
}

/// Empirical ensemble CRPS, equal to mean |x_i - z| - (1 / 2n^2) sum_ij |x_i - x_j|.
/// Evaluated as the integral of (F_n(y) - 1{y >= z})^2 over the sorted
/// members: each piece is a length times an exact weight, so a degenerate
/// ensemble gives exactly |x - z| and the result is never negative.
inline double crps_ensemble(std::span<const double> members, double obs) {
  require(!members.empty(), ErrorKind::domain, "crps_ensemble: empty ensemble");
  const auto n = static_cast<double>(members.size());
  std::vector<double> x(members.begin(), members.end());
  std::sort(x.begin(), x.end());
  double crps = 0.0;
  if (obs < x.front()) crps += x.front() - obs;
  if (obs > x.back()) crps += obs - x.back();
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double lo = x[i], hi = x[i + 1];
    const double f = double(i + 1) / n;
    if (obs <= lo) {
      crps += (hi - lo) * (1.0 - f) * (1.0 - f);
    } else if (obs >= hi) {
      crps += (hi - lo) * f * f;
    } else {
      crps += (obs - lo) * f * f + (hi - obs) * (1.0 - f) * (1.0 - f);
    }
  }
  return crps;
}

/// Fraction of cells with lower <= truth <= upper.
inline double interval_coverage(const Matrix& lower, const Matrix& upper, const Matrix& truth) {
  require(lower.rows() == truth.rows() && lower.cols() == truth.cols() && upper.rows() == truth.rows() &&
              upper.cols() == truth.cols(),
          ErrorKind::dimension, "interval_coverage: shape mismatch");
  require(truth.size() > 0, ErrorKind::dimension, "interval_coverage: empty input");
  Eigen::Index hits = 0;
  for (Eigen::Index t = 0; t < truth.rows(); ++t)
    for (Eigen::Index i = 0; i < truth.cols(); ++i) {
      require(!(lower(t, i) > upper(t, i)), ErrorKind::domain, "interval_coverage: lower > upper in a cell");
      if (lower(t, i) <= truth(t, i) && truth(t, i) <= upper(t, i)) ++hits;
    }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

/// Scores of an ensemble forecast against truth, overall and broken down by
/// lead row and by location.
struct ScoreReport {
  double mspe = 0.0;
  double crps_mean = 0.0;
  double coverage = 0.0;
  Vector mspe_by_row, crps_by_row, coverage_by_row;
  Vector mspe_by_location, crps_by_location, coverage_by_location;
};

/// members[j] is H x n_y; mean/lower/upper are H x n_y.
inline ScoreReport score_forecast(const std::vector<Matrix>& members, const Matrix& mean, const Matrix& lower,
                                  const Matrix& upper, const Matrix& truth) {
  require(!members.empty(), ErrorKind::domain, "score_forecast: no members");
  for (const auto& m : members)
    require(m.rows() == truth.rows() && m.cols() == truth.cols(), ErrorKind::dimension,
            "score_forecast: member shape differs from truth");
  const Eigen::Index h = truth.rows(), n = truth.cols();
  Matrix crps(h, n);
  std::vector<double> cell(members.size());
  for (Eigen::Index t = 0; t < h; ++t)
    for (Eigen::Index i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < members.size(); ++j) cell[j] = members[j](t, i);
      crps(t, i) = crps_ensemble(cell, truth(t, i));
    }
  ScoreReport r;
  r.mspe = mspe(mean, truth);
  r.crps_mean = crps.mean();
  r.coverage = interval_coverage(lower, upper, truth);
  const Matrix sq = (mean - truth).array().square();
  Matrix inside(h, n);
  for (Eigen::Index t = 0; t < h; ++t)
    for (Eigen::Index i = 0; i < n; ++i)
      inside(t, i) = (lower(t, i) <= truth(t, i) && truth(t, i) <= upper(t, i)) ? 1.0 : 0.0;
  r.mspe_by_row = sq.rowwise().mean();
  r.crps_by_row = crps.rowwise().mean();
  r.coverage_by_row = inside.rowwise().mean();
  r.mspe_by_location = sq.colwise().mean().transpose();
  r.crps_by_location = crps.colwise().mean().transpose();
  r.coverage_by_location = inside.colwise().mean().transpose();
  return r;
}

}  // namespace rcast
