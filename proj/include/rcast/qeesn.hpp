#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "rcast/error.hpp"
#include "rcast/field.hpp"
#include "rcast/forecast.hpp"
#include "rcast/numerics.hpp"
#include "rcast/parallel.hpp"
#include "rcast/reservoir.hpp"
#include "rcast/rng.hpp"

namespace rcast {

/// Quadratic ensemble ESN hyperparameters.
struct QeesnHyper {
  ReservoirParams reservoir;
  EmbeddingSpec embedding;
  double r_v = 0.1;
  int lead = 1;
  int burn_in = 30;
  bool add_noise = true;
  double level = 0.95;

  void validate() const {
    reservoir.validate();
    require(embedding.m >= 0, ErrorKind::config, "m must be >= 0");
    require(embedding.tau >= 1, ErrorKind::config, "tau must be >= 1");
    require(r_v >= 0.0, ErrorKind::config, "r_v must be >= 0");
    require(lead >= 1, ErrorKind::config, "lead must be >= 1");
    require(burn_in >= 0, ErrorKind::config, "burn_in must be >= 0");
    require(level > 0.0 && level < 1.0, ErrorKind::config, "level must be in (0,1)");
  }
};

struct QeesnMember {
  std::uint64_t member_id = 0;
  RngStream reservoir_seed;  // stream of the accepted reservoir draw
  Matrix v;                  // n_y x 2n_h, [V1 V2]
  double sigma2_eps = 0.0;
};

struct QeesnEnsemble {
  std::vector<QeesnMember> members;
  QeesnHyper hyper;
  std::uint64_t base_seed = 0;
  std::uint64_t data_fingerprint = 0;
  Standardizer input_scaling;
  Vector response_mean;  // the readout predicts deviations from this
  Eigen::Index n_training_rows = 0;

  Eigen::Index n_y() const { return response_mean.size(); }
  Eigen::Index input_dim() const { return input_scaling.mean.size(); }
};

namespace detail {

/// Inputs and responses shared by every member of one training run.
struct QeesnDesign {
  Standardizer input_scaling;
  Matrix embedded;        // (T - m tau) x (m+1)p
  Vector response_mean;
  Matrix response;        // N x n_y centered targets
  Eigen::Index first_row = 0;  // first embedded row used for training
};

inline QeesnDesign qeesn_design(const Matrix& z, const Matrix& x, const QeesnHyper& hyper) {
  require(z.rows() == x.rows(), ErrorKind::dimension,
          "qeesn: inputs have " + std::to_string(x.rows()) + " rows, responses " +
              std::to_string(z.rows()));
  const Eigen::Index lag = hyper.embedding.history();
  const Eigen::Index n = z.rows() - lag - hyper.burn_in - hyper.lead;
  require(n >= 1, ErrorKind::insufficient_history,
          "qeesn: " + std::to_string(z.rows()) + " time steps leave no training pairs after m*tau=" +
              std::to_string(lag) + ", burn_in=" + std::to_string(hyper.burn_in) +
              ", lead=" + std::to_string(hyper.lead));
  QeesnDesign d;
  d.input_scaling = Standardizer::fit(x);
  d.embedded = build_embeddings(d.input_scaling.apply(x), hyper.embedding);
  d.first_row = hyper.burn_in;
  // embedded row r is time r + lag; its target is time r + lag + lead
  const Matrix targets = z.middleRows(lag + hyper.burn_in + hyper.lead, n);
  d.response_mean = targets.colwise().mean().transpose();
  d.response = targets.rowwise() - d.response_mean.transpose();
  return d;
}

inline QeesnMember fit_member_on(const QeesnDesign& d, const QeesnHyper& hyper,
                                 std::uint64_t base_seed, std::uint64_t member_id) {
  const Reservoir res = draw_reservoir(hyper.reservoir, d.embedded.cols(),
                                       RngStream{base_seed, stream_ids::reservoir(member_id)});
  const Matrix states = run_states(res, d.embedded);
  const Matrix features = quadratic_features(states.middleRows(d.first_row, d.response.rows()));
  QeesnMember m;
  m.member_id = member_id;
  m.reservoir_seed = res.seed;
  m.v = ridge_solve(features, d.response, hyper.r_v).transpose();
  const Matrix resid = d.response - features * m.v.transpose();
  m.sigma2_eps = resid.squaredNorm() / static_cast<double>(resid.size());
  return m;
}

}  // namespace detail

/// Fits one ensemble member: its own reservoir draw and ridge readout.
inline QeesnMember fit_member(const FieldSeries& z, const Matrix& x, const QeesnHyper& hyper,
                              std::uint64_t base_seed, std::uint64_t member_id) {
  hyper.validate();
  return detail::fit_member_on(detail::qeesn_design(z.values(), x, hyper), hyper, base_seed,
                               member_id);
}

/// Parametric-bootstrap ensemble over n_res reservoir draws.
inline QeesnEnsemble fit_ensemble(const FieldSeries& z, const Matrix& x, const QeesnHyper& hyper,
                                  int n_res, std::uint64_t base_seed) {
  hyper.validate();
  require(n_res >= 1, ErrorKind::config, "n_res must be >= 1");
  const auto design = detail::qeesn_design(z.values(), x, hyper);
  QeesnEnsemble ens;
  ens.hyper = hyper;
  ens.base_seed = base_seed;
  ens.data_fingerprint = fingerprint(z);
  ens.input_scaling = design.input_scaling;
  ens.response_mean = design.response_mean;
  ens.n_training_rows = design.response.rows();
  ens.members.resize(static_cast<std::size_t>(n_res));
  parallel_for(ens.members.size(), [&](std::size_t j) {
    ens.members[j] = detail::fit_member_on(design, hyper, base_seed, j);
  });
  return ens;
}

/// Direct lead-time forecasts from the last `horizon` rows of the supplied
/// input history. Each member reruns its reservoir from a zero state over the
/// whole history.
inline EnsembleForecast forecast(const QeesnEnsemble& ens, const Matrix& x_recent, int horizon = 1) {
  require(!ens.members.empty(), ErrorKind::domain, "forecast: empty ensemble");
  require(horizon >= 1, ErrorKind::config, "forecast: horizon must be >= 1");
  const auto& hyper = ens.hyper;
  const Eigen::Index lag = hyper.embedding.history();
  require(x_recent.rows() >= lag + horizon, ErrorKind::insufficient_history,
          "forecast: history of " + std::to_string(x_recent.rows()) + " rows is shorter than m*tau + H = " +
              std::to_string(lag + horizon));
  const Matrix embedded = build_embeddings(ens.input_scaling.apply(x_recent), hyper.embedding);
  const Eigen::Index first = embedded.rows() - horizon;

  EnsembleForecast fc;
  fc.level = hyper.level;
  fc.lead = hyper.lead;
  for (Eigen::Index h = 0; h < horizon; ++h) fc.origin_rows.push_back(first + h + lag);
  fc.member_values.resize(ens.members.size());
  parallel_for(ens.members.size(), [&](std::size_t j) {
    const auto& member = ens.members[j];
    // Redraw from the recorded accepted stream: no retries needed.
    Reservoir res = draw_reservoir(hyper.reservoir, embedded.cols(), member.reservoir_seed);
    const Matrix states = run_states(res, embedded);
    const Matrix features = quadratic_features(states.bottomRows(horizon));
    Matrix pred = (features * member.v.transpose()).rowwise() + ens.response_mean.transpose();
    if (hyper.add_noise) {
      Rng rng(RngStream{ens.base_seed, stream_ids::forecast_noise}.substream(member.member_id));
      const double sd = std::sqrt(member.sigma2_eps);
      for (Eigen::Index t = 0; t < pred.rows(); ++t)
        for (Eigen::Index i = 0; i < pred.cols(); ++i) pred(t, i) += sd * rng.normal();
    }
    fc.member_values[j] = std::move(pred);
  });
  summarize(fc);
  return fc;
}

/// Grid over the hyperparameters the readout is most sensitive to.
struct QeesnGrid {
  std::vector<int> n_h;
  std::vector<double> nu;
  std::vector<double> r_v;
};

struct CvPoint {
  int n_h;
  double nu;
  double r_v;
  double mspe;
};

struct CvResult {
  QeesnHyper best;
  std::vector<CvPoint> table;  // in evaluation order
};

/// Time-ordered 80/20 split: fit on the head, score the ensemble mean on the
/// tail. Ties prefer smaller n_h, then smaller nu, then larger r_v.
inline CvResult cross_validate(const FieldSeries& z, const Matrix& x, const QeesnGrid& grid,
                               const QeesnHyper& base, int n_res, std::uint64_t base_seed) {
  require(!grid.n_h.empty() && !grid.nu.empty() && !grid.r_v.empty(), ErrorKind::config,
          "cross_validate: empty grid");
  const Eigen::Index total = z.n_times();
  const Eigen::Index n_train = static_cast<Eigen::Index>(std::floor(0.8 * static_cast<double>(total)));
  const Eigen::Index n_valid = total - n_train;
  require(n_valid >= base.lead, ErrorKind::insufficient_history,
          "cross_validate: validation window of " + std::to_string(n_valid) +
              " steps is shorter than lead " + std::to_string(base.lead));
  require(x.rows() == total, ErrorKind::dimension, "cross_validate: inputs not aligned with responses");

  std::vector<std::tuple<int, double, double>> points;
  for (int nh : grid.n_h)
    for (double nu : grid.nu)
      for (double r : grid.r_v) points.emplace_back(nh, nu, r);
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) > std::get<2>(b);
  });

  const FieldSeries train = z.slice(0, n_train);
  const Matrix x_train = x.topRows(n_train);
  const Matrix truth = z.values().bottomRows(n_valid);
  const Matrix history = x.topRows(total - base.lead);

  CvResult result;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [nh, nu, r] : points) {
    QeesnHyper h = base;
    h.reservoir.n_h = nh;
    h.reservoir.nu = nu;
    h.r_v = r;
    h.add_noise = false;
    double score = std::numeric_limits<double>::infinity();
    try {
      const auto ens = fit_ensemble(train, x_train, h, n_res, base_seed);
      const auto fc = forecast(ens, history, static_cast<int>(n_valid));
      score = (fc.mean - truth).squaredNorm() / static_cast<double>(truth.size());
    } catch (const Error& e) {
      // an unusable grid point (e.g. a degenerate reservoir) just loses
      if (e.kind() != ErrorKind::degenerate_reservoir && e.kind() != ErrorKind::singular) throw;
    }
    if (!std::isfinite(score)) score = std::numeric_limits<double>::infinity();
    result.table.push_back({nh, nu, r, score});
    if (score < best) {
      best = score;
      result.best = base;
      result.best.reservoir.n_h = nh;
      result.best.reservoir.nu = nu;
      result.best.r_v = r;
    }
  }
  require(std::isfinite(best), ErrorKind::singular, "cross_validate: no finite validation score");
  return result;
}

}  // namespace rcast
