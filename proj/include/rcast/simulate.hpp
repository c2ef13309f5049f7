#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rcast/error.hpp"
#include "rcast/field.hpp"
#include "rcast/numerics.hpp"
#include "rcast/rng.hpp"

namespace rcast {

inline constexpr double kBlowUpBound = 1e6;

/// Quadratic nonlinear evolution
///   a_t(i) = sum_j L(i,j) a_{t-1}(j)
///          + sum_k sum_{l<=k} Q_i(k,l) a_{t-1}(k) tanh(a_{t-1}(l)) + eta_t(i).
struct GqnParams {
  Matrix theta_l;                // p x p
  std::vector<Matrix> theta_q;   // p matrices, each p x p lower triangular
  double noise_sd = 0.0;
  Matrix phi_out;                // n_y x p

  Eigen::Index p() const { return theta_l.rows(); }

  void validate() const {
    require(theta_l.rows() == theta_l.cols() && theta_l.rows() >= 1, ErrorKind::config,
            "gqn: theta_l must be square");
    require(static_cast<Eigen::Index>(theta_q.size()) == p(), ErrorKind::config,
            "gqn: theta_q needs one p x p slice per state");
    for (const auto& q : theta_q) {
      require(q.rows() == p() && q.cols() == p(), ErrorKind::config, "gqn: theta_q slice has wrong shape");
      for (Eigen::Index k = 0; k < p(); ++k)
        for (Eigen::Index l = k + 1; l < p(); ++l)
          require(q(k, l) == 0.0, ErrorKind::config, "gqn: theta_q must vanish for l > k");
    }
    require(noise_sd >= 0.0, ErrorKind::config, "gqn: noise_sd must be >= 0");
    require(phi_out.cols() == p() && phi_out.rows() >= 1, ErrorKind::config,
            "gqn: phi_out must be n_y x p");
  }
};

struct GqnSimulation {
  Matrix alpha;  // T x p, row 0 is the initial state
  FieldSeries field;
};

/// Locations on a near-square lattice in the unit square, row-major.
inline std::vector<LocationRecord> grid_locations(Eigen::Index n) {
  const auto side = static_cast<Eigen::Index>(std::ceil(std::sqrt(static_cast<double>(n))));
  std::vector<LocationRecord> out;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double gx = side > 1 ? double(i % side) / double(side - 1) : 0.0;
    const double gy = side > 1 ? double(i / side) / double(side - 1) : 0.0;
    out.push_back({static_cast<std::int64_t>(i), gx, gy});
  }
  return out;
}

inline FieldSeries field_on_grid(Matrix values) {
  std::vector<std::int64_t> times(static_cast<std::size_t>(values.rows()));
  for (std::size_t t = 0; t < times.size(); ++t) times[t] = static_cast<std::int64_t>(t);
  auto locs = grid_locations(values.cols());
  return FieldSeries(std::move(values), std::move(times), std::move(locs));
}

inline GqnSimulation simulate_gqn(const GqnParams& params, Eigen::Index steps, const Vector& alpha0,
                                  RngStream stream) {
  params.validate();
  require(steps >= 1, ErrorKind::config, "gqn: T must be >= 1");
  const Eigen::Index p = params.p();
  require(alpha0.size() == p, ErrorKind::dimension, "gqn: alpha0 has wrong length");
  Rng rng(stream);
  Matrix alpha(steps, p);
  alpha.row(0) = alpha0.transpose();
  Vector next(p);
  for (Eigen::Index t = 1; t < steps; ++t) {
    const Vector prev = alpha.row(t - 1).transpose();
    const Vector squashed = prev.array().tanh().matrix();
    next = params.theta_l * prev;
    for (Eigen::Index i = 0; i < p; ++i) {
      const Matrix& q = params.theta_q[static_cast<std::size_t>(i)];
      double acc = 0.0;
      for (Eigen::Index k = 0; k < p; ++k)
        for (Eigen::Index l = 0; l <= k; ++l) acc += q(k, l) * prev(k) * squashed(l);
      next(i) += acc;
    }
    for (Eigen::Index i = 0; i < p; ++i) next(i) += params.noise_sd * rng.normal();
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > kBlowUpBound)
      fail(ErrorKind::blow_up, "gqn: state magnitude exceeded 1e6 at step " + std::to_string(t));
    alpha.row(t) = next.transpose();
  }
  Matrix field = alpha * params.phi_out.transpose();
  return {std::move(alpha), field_on_grid(std::move(field))};
}

/// Smooth spatial loading: Gaussian bumps at random centers on the grid.
inline Matrix bump_loadings(Eigen::Index n_y, Eigen::Index p, Rng& rng, double width = 0.3) {
  const auto locs = grid_locations(n_y);
  Matrix phi(n_y, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double cx = rng.uniform(), cy = rng.uniform();
    for (Eigen::Index i = 0; i < n_y; ++i) {
      const double d2 = std::pow(locs[i].x - cx, 2) + std::pow(locs[i].y - cy, 2);
      phi(i, j) = std::exp(-0.5 * d2 / (width * width));
    }
  }
  return phi;
}

/// Random GQN parameters: a symmetric linear operator with spectral radius
/// `linear_radius`, sparse quadratic slices with entries
/// quad_scale * Uniform(-1, 1) present with probability quad_density.
inline GqnParams default_gqn_params(Eigen::Index p, Eigen::Index n_y, RngStream stream,
                                    double linear_radius = 0.7, double quad_scale = 0.1,
                                    double quad_density = 0.3, double noise_sd = 1.0) {
  require(p >= 1 && n_y >= 1, ErrorKind::config, "gqn: p and n_y must be >= 1");
  Rng rng(stream);
  GqnParams g;
  // persistent linear part: Q diag(d) Q' with random orthogonal Q and
  // eigenvalues in [radius/2, radius], the largest pinned to radius
  Matrix gauss(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) gauss(i, j) = rng.normal();
  const Matrix q_orth = Eigen::HouseholderQR<Matrix>(gauss).householderQ();
  Vector d(p);
  for (Eigen::Index i = 0; i < p; ++i) d(i) = i == 0 ? 1.0 : rng.uniform(0.5, 1.0);
  g.theta_l = linear_radius * q_orth * d.asDiagonal() * q_orth.transpose();
  for (Eigen::Index i = 0; i < p; ++i) {
    Matrix q = Matrix::Zero(p, p);
    for (Eigen::Index k = 0; k < p; ++k)
      for (Eigen::Index l = 0; l <= k; ++l)
        if (rng.bernoulli(quad_density)) q(k, l) = quad_scale * rng.uniform(-1.0, 1.0);
    g.theta_q.push_back(std::move(q));
  }
  g.noise_sd = noise_sd;
  g.phi_out = bump_loadings(n_y, p, rng);
  return g;
}

/// Y_t = M Y_{t-1} + eta_t, eta_t ~ N(0, C_eta).
struct LinearDstmParams {
  Matrix m;
  Matrix c_eta;
};

/// Factor L with L L' = C for a symmetric PSD matrix. Cholesky when it
/// succeeds (so diagonal C gives the elementwise square root in place),
/// otherwise a symmetric eigen factor.
inline Matrix psd_factor(const Matrix& c) {
  require(c.rows() == c.cols(), ErrorKind::config, "psd_factor: matrix not square");
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  require((c - c.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, ErrorKind::config,
          "psd_factor: matrix not symmetric");
  Eigen::LLT<Matrix> llt(c);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Matrix> es(c);
  require(es.eigenvalues().minCoeff() >= -1e-10 * scale, ErrorKind::config,
          "psd_factor: covariance is not positive semidefinite");
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

inline FieldSeries simulate_linear_dstm(const LinearDstmParams& params, Eigen::Index steps, const Vector& y0,
                                        RngStream stream) {
  const Eigen::Index n = params.m.rows();
  require(params.m.cols() == n && params.c_eta.rows() == n && params.c_eta.cols() == n, ErrorKind::config,
          "linear dstm: M and C_eta must be n x n");
  require(y0.size() == n, ErrorKind::dimension, "linear dstm: y0 has wrong length");
  require(steps >= 1, ErrorKind::config, "linear dstm: T must be >= 1");
  const Matrix factor = psd_factor(params.c_eta);
  Rng rng(stream);
  Matrix y(steps, n);
  y.row(0) = y0.transpose();
  Vector z(n);
  for (Eigen::Index t = 1; t < steps; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
    y.row(t) = (params.m * y.row(t - 1).transpose() + factor * z).transpose();
    if (!y.row(t).allFinite() || y.row(t).cwiseAbs().maxCoeff() > kBlowUpBound)
      fail(ErrorKind::blow_up, "linear dstm: state magnitude exceeded 1e6 at step " + std::to_string(t));
  }
  return field_on_grid(std::move(y));
}

inline void add_observation_noise(Matrix& values, double sd, RngStream stream) {
  if (sd <= 0.0) return;
  Rng rng(stream);
  for (Eigen::Index t = 0; t < values.rows(); ++t)
    for (Eigen::Index i = 0; i < values.cols(); ++i) values(t, i) += sd * rng.normal();
}

/// Draws of z = X beta + Phi alpha + nu with alpha ~ N(0, C_alpha) and
/// nu ~ N(0, C_nu); one draw per row.
inline Matrix sample_basis_field(const Vector& trend, const Matrix& phi, const Matrix& c_alpha, const Matrix& c_nu,
                                 Eigen::Index n_samples, RngStream stream) {
  const Eigen::Index n = phi.rows(), k = phi.cols();
  require(trend.size() == n && c_alpha.rows() == k && c_alpha.cols() == k && c_nu.rows() == n &&
              c_nu.cols() == n,
          ErrorKind::dimension, "sample_basis_field: dimension mismatch");
  const Matrix la = psd_factor(c_alpha), ln = psd_factor(c_nu);
  Rng rng(stream);
  Matrix out(n_samples, n);
  Vector a(k), e(n);
  for (Eigen::Index s = 0; s < n_samples; ++s) {
    for (Eigen::Index j = 0; j < k; ++j) a(j) = rng.normal();
    for (Eigen::Index i = 0; i < n; ++i) e(i) = rng.normal();
    out.row(s) = (trend + phi * (la * a) + ln * e).transpose();
  }
  return out;
}

/// Marginal covariance of the field after integrating out alpha.
inline Matrix basis_marginal_covariance(const Matrix& phi, const Matrix& c_alpha, const Matrix& c_nu) {
  return phi * c_alpha * phi.transpose() + c_nu;
}

// ---------------------------------------------------------------------------
// pinned synthetic benchmarks

struct SyntheticData {
  FieldSeries field;  // noisy observations
  Matrix latent;      // T x p latent states
};

/// GQN latent dynamics observed through smooth loadings plus white noise.
inline SyntheticData gqn_benchmark(std::uint64_t seed, Eigen::Index p = 5, Eigen::Index n_y = 50,
                                   Eigen::Index steps = 700, double obs_sd = 0.1,
                                   double quad_scale = 0.3, double linear_radius = 0.5,
                                   double noise_sd = 1.0) {
  const RngStream base{seed, stream_ids::simulate};
  const GqnParams params =
      default_gqn_params(p, n_y, base.substream(1), linear_radius, quad_scale, 0.3, noise_sd);
  const Eigen::Index spin = 100;
  auto sim = simulate_gqn(params, steps + spin, Vector::Zero(p), base.substream(2));
  Matrix values = sim.field.values().bottomRows(steps);
  add_observation_noise(values, obs_sd, base.substream(3));
  return {field_on_grid(std::move(values)), sim.alpha.bottomRows(steps)};
}

/// Two-timescale field: `n_fast` AR(1) components with coefficient 0.5 and
/// `n_slow` with 0.98, each with unit stationary variance, observed through
/// smooth loadings plus white noise.
inline SyntheticData multiscale_benchmark(std::uint64_t seed, Eigen::Index n_y = 30, Eigen::Index steps = 600,
                                          Eigen::Index n_fast = 2, Eigen::Index n_slow = 2,
                                          double obs_sd = 0.2) {
  const RngStream base{seed, stream_ids::simulate};
  const Eigen::Index p = n_fast + n_slow;
  LinearDstmParams lp;
  lp.m = Matrix::Zero(p, p);
  lp.c_eta = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double rho = i < n_fast ? 0.5 : 0.98;
    lp.m(i, i) = rho;
    lp.c_eta(i, i) = 1.0 - rho * rho;
  }
  const Eigen::Index spin = 200;
  const FieldSeries latent = simulate_linear_dstm(lp, steps + spin, Vector::Zero(p), base.substream(1));
  Rng rng(base.substream(2));
  const Matrix phi = bump_loadings(n_y, p, rng);
  Matrix alpha = latent.values().bottomRows(steps);
  Matrix values = alpha * phi.transpose();
  add_observation_noise(values, obs_sd, base.substream(3));
  return {field_on_grid(std::move(values)), std::move(alpha)};
}

}  // namespace rcast
