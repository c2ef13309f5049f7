#pragma once

#include <cmath>
#include <string>

#include "rcast/error.hpp"
#include "rcast/numerics.hpp"
#include "rcast/rng.hpp"

namespace rcast {

/// Hyperparameters of one random reservoir.
///
/// `pi_w` and `pi_u` are the probabilities that an entry is NONZERO (drawn
/// from the uniform branch); the remaining mass sits on zero.
struct ReservoirParams {
  int n_h = 30;
  double pi_w = 0.1;
  double pi_u = 0.1;
  double a_w = 0.1;
  double a_u = 0.1;
  double nu = 0.35;  // target spectral radius of the scaled recurrent matrix

  void validate() const {
    require(n_h >= 1, ErrorKind::config, "n_h must be >= 1");
    require(pi_w >= 0.0 && pi_w <= 1.0, ErrorKind::config, "pi_w must be in [0,1]");
    require(pi_u >= 0.0 && pi_u <= 1.0, ErrorKind::config, "pi_u must be in [0,1]");
    require(a_w > 0.0, ErrorKind::config, "a_w must be > 0");
    require(a_u > 0.0, ErrorKind::config, "a_u must be > 0");
    require(nu >= 0.0 && nu <= 1.0, ErrorKind::config, "nu must be in [0,1]");
  }
};

struct Reservoir {
  Matrix w_scaled;  // n_h x n_h, spectral radius nu
  Matrix u;         // n_h x q
  double lambda_w = 0.0;  // spectral radius of the unscaled draw
  ReservoirParams params;
  RngStream seed;  // stream that produced the accepted draw

  Eigen::Index n_h() const { return w_scaled.rows(); }
  Eigen::Index input_dim() const { return u.cols(); }
};

inline constexpr int kReservoirAttempts = 16;
inline constexpr double kDegenerateRadius = 1e-12;

/// Draws W then U, both row-major, entry by entry: a Bernoulli(pi) gate and,
/// when it opens, a Uniform(-a, a) value. W is rescaled to spectral radius nu.
/// A draw with vanishing spectral radius is retried on the next substream.
inline Reservoir draw_reservoir(const ReservoirParams& params, Eigen::Index q, RngStream stream) {
  params.validate();
  require(q >= 1, ErrorKind::dimension, "draw_reservoir: input dimension must be >= 1");
  const Eigen::Index n = params.n_h;
  for (int attempt = 0; attempt < kReservoirAttempts; ++attempt) {
    const RngStream s = attempt == 0 ? stream : stream.substream(static_cast<std::uint64_t>(attempt));
    Rng rng(s);
    Matrix w(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        w(i, j) = rng.bernoulli(params.pi_w) ? rng.uniform(-params.a_w, params.a_w) : 0.0;
    Matrix u(n, q);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < q; ++j)
        u(i, j) = rng.bernoulli(params.pi_u) ? rng.uniform(-params.a_u, params.a_u) : 0.0;
    const double lambda = spectral_radius(w);
    if (lambda < kDegenerateRadius) continue;
    Reservoir res;
    res.w_scaled = (params.nu / lambda) * w;
    res.u = std::move(u);
    res.lambda_w = lambda;
    res.params = params;
    res.seed = s;
    return res;
  }
  fail(ErrorKind::degenerate_reservoir,
       "draw_reservoir: spectral radius vanished in " + std::to_string(kReservoirAttempts) +
           " attempts (pi_w=" + std::to_string(params.pi_w) + ", n_h=" + std::to_string(n) + ")");
}

struct EmbeddingSpec {
  int m = 0;    // extra lags
  int tau = 1;  // lag spacing

  Eigen::Index history() const { return static_cast<Eigen::Index>(m) * tau; }
};

/// Row r (time t = r + m*tau) is [x_t, x_{t-tau}, ..., x_{t-m*tau}].
inline Matrix build_embeddings(const Matrix& x, const EmbeddingSpec& spec) {
  require(spec.m >= 0 && spec.tau >= 1, ErrorKind::config, "embedding: need m >= 0, tau >= 1");
  const Eigen::Index lag = spec.history();
  require(x.rows() > lag, ErrorKind::insufficient_history,
          "embedding: " + std::to_string(x.rows()) + " time steps but m*tau = " +
              std::to_string(lag));
  const Eigen::Index p = x.cols();
  const Eigen::Index rows = x.rows() - lag;
  Matrix out(rows, (spec.m + 1) * p);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index t = r + lag;
    for (int k = 0; k <= spec.m; ++k) out.block(r, k * p, 1, p) = x.row(t - k * spec.tau);
  }
  return out;
}

/// y_t = tanh(W* y_{t-1} + U x_t), returning every state.
inline Matrix run_states(const Reservoir& res, const Matrix& inputs, const Vector& y0) {
  require(inputs.cols() == res.input_dim(), ErrorKind::dimension,
          "run_states: inputs have " + std::to_string(inputs.cols()) + " columns, reservoir expects " +
              std::to_string(res.input_dim()));
  require(y0.size() == res.n_h(), ErrorKind::dimension, "run_states: y0 has wrong length");
  Matrix states(inputs.rows(), res.n_h());
  // Input drive for all steps at once; the recursion only adds W* y.
  const Matrix drive = inputs * res.u.transpose();
  Vector y = y0;
  for (Eigen::Index t = 0; t < inputs.rows(); ++t) {
    y = (res.w_scaled * y + drive.row(t).transpose()).array().tanh().matrix();
    states.row(t) = y.transpose();
  }
  return states;
}

inline Matrix run_states(const Reservoir& res, const Matrix& inputs) {
  return run_states(res, inputs, Vector::Zero(res.n_h()));
}

/// [y, y∘y] per row.
inline Matrix quadratic_features(const Matrix& states) {
  Matrix out(states.rows(), 2 * states.cols());
  out.leftCols(states.cols()) = states;
  out.rightCols(states.cols()) = states.array().square().matrix();
  return out;
}

}  // namespace rcast
