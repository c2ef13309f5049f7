#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rcast/error.hpp"
#include "rcast/numerics.hpp"

namespace rcast {

/// Separable exponential space-time covariance plus a nugget.
struct CovarianceParams {
  double sigma2 = 1.0;
  double rho_s = 1.0;
  double rho_t = 1.0;
  double nugget = 0.0;

  void validate() const {
    require(sigma2 > 0.0, ErrorKind::config, "covariance: sigma2 must be > 0");
    require(rho_s > 0.0 && rho_t > 0.0, ErrorKind::config, "covariance: ranges must be > 0");
    require(nugget >= 0.0, ErrorKind::config, "covariance: nugget must be >= 0");
  }

  double operator()(double ds, double dt) const {
    return sigma2 * std::exp(-ds / rho_s) * std::exp(-std::abs(dt) / rho_t);
  }
};

struct SpaceTimePoint {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
};

/// Latent-process cross covariance (no nugget).
inline Matrix cross_covariance(const std::vector<SpaceTimePoint>& a, const std::vector<SpaceTimePoint>& b,
                               const CovarianceParams& params) {
  params.validate();
  Matrix c(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      c(Eigen::Index(i), Eigen::Index(j)) =
          params(std::hypot(a[i].x - b[j].x, a[i].y - b[j].y), a[i].t - b[j].t);
  return c;
}

/// Covariance of observations at `points`: latent covariance plus nugget on
/// the diagonal.
inline Matrix covariance_matrix(const std::vector<SpaceTimePoint>& points, const CovarianceParams& params) {
  require(!points.empty(), ErrorKind::domain, "covariance_matrix: no points");
  Matrix c = cross_covariance(points, points, params);
  c.diagonal().array() += params.nugget;
  return c;
}

struct KrigingResult {
  Vector mean;
  Vector variance;  // latent-process prediction variance
  Vector beta_gls;
};

/// Universal kriging with GLS trend estimate. The variance includes the
/// correction for estimating the trend coefficients.
inline KrigingResult krige(const std::vector<SpaceTimePoint>& obs, const Vector& z, const Matrix& x,
                           const std::vector<SpaceTimePoint>& pred, const Matrix& x0,
                           const CovarianceParams& params) {
  const auto m = static_cast<Eigen::Index>(obs.size());
  require(z.size() == m && x.rows() == m, ErrorKind::dimension, "krige: observation sizes disagree");
  require(x0.rows() == static_cast<Eigen::Index>(pred.size()) && x0.cols() == x.cols(), ErrorKind::dimension,
          "krige: prediction covariates have wrong shape");
  require(x.cols() >= 1 && x.cols() <= m, ErrorKind::dimension, "krige: need 1 <= p <= m covariates");
  const Matrix cz = covariance_matrix(obs, params);
  Eigen::LLT<Matrix> cz_llt(cz);
  require(cz_llt.info() == Eigen::Success && cz_llt.rcond() > 1e-14, ErrorKind::singular,
          "krige: observation covariance is singular");
  const Matrix ci_x = cz_llt.solve(x);
  const Matrix xt_ci_x = x.transpose() * ci_x;
  Eigen::LLT<Matrix> g_llt(xt_ci_x);
  require(g_llt.info() == Eigen::Success && g_llt.rcond() > 1e-14, ErrorKind::singular,
          "krige: X' C^-1 X is singular");

  KrigingResult r;
  r.beta_gls = g_llt.solve(ci_x.transpose() * z);
  const Vector resid_w = cz_llt.solve(z - x * r.beta_gls);
  const Matrix c0 = cross_covariance(obs, pred, params);  // m x n0
  const Matrix ci_c0 = cz_llt.solve(c0);
  r.mean = x0 * r.beta_gls + c0.transpose() * resid_w;
  const Matrix d = x0.transpose() - x.transpose() * ci_c0;  // p x n0
  const Matrix g_inv_d = g_llt.solve(d);
  r.variance.resize(x0.rows());
  for (Eigen::Index j = 0; j < x0.rows(); ++j) {
    const double kappa = d.col(j).dot(g_inv_d.col(j));
    r.variance(j) = params.sigma2 - c0.col(j).dot(ci_c0.col(j)) + kappa;
  }
  return r;
}

}  // namespace rcast
