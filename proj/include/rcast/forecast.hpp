#pragma once

#include <vector>

#include "rcast/error.hpp"
#include "rcast/numerics.hpp"

namespace rcast {

/// Ensemble (or posterior-draw) predictive sample with summaries.
///
/// member_values[j] is H x n_y. Row h forecasts the target at history row
/// origin_rows[h] + lead.
struct EnsembleForecast {
  std::vector<Matrix> member_values;
  Matrix mean;
  Matrix lower;
  Matrix upper;
  double level = 0.95;
  std::vector<Eigen::Index> origin_rows;
  int lead = 1;

  Eigen::Index n_members() const { return static_cast<Eigen::Index>(member_values.size()); }
  Eigen::Index horizon() const { return mean.rows(); }
};

/// Fills mean and the central `level` interval from member_values.
inline void summarize(EnsembleForecast& fc) {
  require(!fc.member_values.empty(), ErrorKind::domain, "summarize: no members");
  const Eigen::Index h = fc.member_values.front().rows();
  const Eigen::Index n = fc.member_values.front().cols();
  fc.mean = Matrix::Zero(h, n);
  for (const auto& m : fc.member_values) fc.mean += m;
  fc.mean /= static_cast<double>(fc.member_values.size());
  fc.lower.resize(h, n);
  fc.upper.resize(h, n);
  const double tail = 0.5 * (1.0 - fc.level);
  std::vector<double> cell(fc.member_values.size());
  for (Eigen::Index t = 0; t < h; ++t)
    for (Eigen::Index i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < cell.size(); ++j) cell[j] = fc.member_values[j](t, i);
      fc.lower(t, i) = quantile(cell, tail);
      fc.upper(t, i) = quantile(cell, 1.0 - tail);
    }
}

}  // namespace rcast
