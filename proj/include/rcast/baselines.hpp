#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rcast/error.hpp"
#include "rcast/field.hpp"
#include "rcast/forecast.hpp"
#include "rcast/kriging.hpp"
#include "rcast/numerics.hpp"
#include "rcast/reservoir.hpp"
#include "rcast/rng.hpp"

namespace rcast {

/// Repeats the field at each origin row: row h is z at history row T-H+h.
inline Matrix persistence_forecast(const Matrix& z_history, int horizon = 1) {
  require(horizon >= 1 && z_history.rows() >= horizon, ErrorKind::insufficient_history,
          "persistence: history shorter than horizon");
  return z_history.bottomRows(horizon);
}

/// Repeats the training mean field H times.
inline Matrix climatology_forecast(const Matrix& z_train, int horizon = 1) {
  require(z_train.rows() >= 1, ErrorKind::insufficient_history, "climatology: empty training data");
  require(horizon >= 1, ErrorKind::config, "climatology: horizon must be >= 1");
  const RowVector mean = z_train.colwise().mean();
  return mean.replicate(horizon, 1);
}

/// Ridge regression of z_{t+lead} on standardized, embedded raw inputs at t.
struct LinearAr {
  Standardizer input_scaling;
  EmbeddingSpec embedding;
  int lead = 1;
  Vector response_mean;
  Matrix coef;  // (m+1)p x n_y

  /// Forecasts from the last `horizon` rows of the history.
  Matrix predict(const Matrix& x_recent, int horizon = 1) const {
    require(x_recent.rows() >= embedding.history() + horizon, ErrorKind::insufficient_history,
            "linear ar: history shorter than m*tau + H");
    const Matrix e = build_embeddings(input_scaling.apply(x_recent), embedding);
    return (e.bottomRows(horizon) * coef).rowwise() + response_mean.transpose();
  }
};

inline LinearAr linear_ar_baseline(const Matrix& z, const Matrix& x, const EmbeddingSpec& embedding, int lead,
                                   double r) {
  require(z.rows() == x.rows(), ErrorKind::dimension, "linear ar: inputs not aligned with responses");
  require(lead >= 1, ErrorKind::config, "linear ar: lead must be >= 1");
  const Eigen::Index lag = embedding.history();
  const Eigen::Index n = z.rows() - lag - lead;
  require(n >= 1, ErrorKind::insufficient_history, "linear ar: no training pairs");
  LinearAr ar;
  ar.input_scaling = Standardizer::fit(x);
  ar.embedding = embedding;
  ar.lead = lead;
  const Matrix e = build_embeddings(ar.input_scaling.apply(x), embedding).topRows(n);
  const Matrix targets = z.middleRows(lag + lead, n);
  ar.response_mean = targets.colwise().mean().transpose();
  ar.coef = ridge_solve(e, targets.rowwise() - ar.response_mean.transpose(), r);
  return ar;
}

/// Spatio-temporal kriging used as a forecaster: the last `window` fields
/// are the observations, the target is every location `lead` steps ahead,
/// and the trend is an intercept.
struct KrigingForecaster {
  CovarianceParams covariance;
  int window = 3;
  int lead = 1;
  int n_samples = 100;
  double level = 0.95;
  std::uint64_t base_seed = 0;

  void validate() const {
    covariance.validate();
    require(window >= 1, ErrorKind::config, "kriging: window must be >= 1");
    require(lead >= 1, ErrorKind::config, "kriging: lead must be >= 1");
    require(n_samples >= 1, ErrorKind::config, "kriging: n_samples must be >= 1");
    require(level > 0.0 && level < 1.0, ErrorKind::config, "kriging: level must be in (0,1)");
  }

  /// Gaussian predictive samples (latent variance plus nugget) for the last
  /// `horizon` origins of the history.
  EnsembleForecast forecast(const FieldSeries& history, int horizon = 1) const {
    validate();
    require(history.n_times() >= window + horizon - 1, ErrorKind::insufficient_history,
            "kriging: history shorter than window + H - 1");
    const Eigen::Index n_y = history.n_locations();
    const auto& locs = history.locations();
    EnsembleForecast fc;
    fc.level = level;
    fc.lead = lead;
    fc.member_values.assign(static_cast<std::size_t>(n_samples), Matrix(horizon, n_y));
    for (int h = 0; h < horizon; ++h) {
      const Eigen::Index origin = history.n_times() - horizon + h;
      fc.origin_rows.push_back(origin);
      std::vector<SpaceTimePoint> obs, pred;
      Vector z(window * n_y);
      for (int w = 0; w < window; ++w) {
        const Eigen::Index row = origin - window + 1 + w;
        for (Eigen::Index i = 0; i < n_y; ++i) {
          obs.push_back({locs[i].x, locs[i].y, double(row)});
          z(w * n_y + i) = history.values()(row, i);
        }
      }
      for (Eigen::Index i = 0; i < n_y; ++i) pred.push_back({locs[i].x, locs[i].y, double(origin + lead)});
      const auto kr = krige(obs, z, Matrix::Ones(window * n_y, 1), pred, Matrix::Ones(n_y, 1), covariance);
      Rng rng(RngStream{base_seed, stream_ids::sampling}.substream(static_cast<std::uint64_t>(origin)));
      for (auto& member : fc.member_values)
        for (Eigen::Index i = 0; i < n_y; ++i)
          member(h, i) = kr.mean(i) + std::sqrt(std::max(0.0, kr.variance(i)) + covariance.nugget) * rng.normal();
    }
    summarize(fc);
    return fc;
  }
};

}  // namespace rcast
