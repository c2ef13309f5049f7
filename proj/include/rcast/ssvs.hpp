#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "rcast/error.hpp"
#include "rcast/numerics.hpp"
#include "rcast/parallel.hpp"
#include "rcast/rng.hpp"

namespace rcast {

using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Spike-and-slab prior, one (slab, spike, pi) triple per feature layer, and
/// an inverse-gamma prior on the shared noise variance.
struct SsvsPrior {
  std::vector<double> sigma2_slab{10.0};
  std::vector<double> sigma2_spike{0.001};
  std::vector<double> pi{0.2};
  double alpha_eta = 0.01;
  double beta_eta = 0.01;

  static SsvsPrior uniform(std::size_t layers, double slab, double spike, double pi,
                           double alpha_eta = 0.01, double beta_eta = 0.01) {
    return {std::vector<double>(layers, slab), std::vector<double>(layers, spike),
            std::vector<double>(layers, pi), alpha_eta, beta_eta};
  }

  std::size_t layers() const { return pi.size(); }

  void validate() const {
    require(!pi.empty() && sigma2_slab.size() == pi.size() && sigma2_spike.size() == pi.size(),
            ErrorKind::config, "ssvs prior: per-layer vectors must be nonempty and equal length");
    for (std::size_t l = 0; l < pi.size(); ++l) {
      require(sigma2_spike[l] > 0.0, ErrorKind::config, "ssvs prior: sigma2_spike must be > 0");
      require(sigma2_slab[l] >= sigma2_spike[l], ErrorKind::config,
              "ssvs prior: sigma2_slab must be >= sigma2_spike");
      require(pi[l] >= 0.0 && pi[l] <= 1.0, ErrorKind::config, "ssvs prior: pi must be in [0,1]");
    }
    require(alpha_eta > 0.0 && beta_eta > 0.0, ErrorKind::config,
            "ssvs prior: alpha_eta and beta_eta must be > 0");
  }
};

struct SsvsChain {
  std::vector<Matrix> beta;   // each q x k
  std::vector<Mask> gamma;    // each q x k, entries 0/1
  std::vector<double> sigma2_eta;
  int n_iter = 0;
  int burn = 0;
  int thin = 1;
  RngStream seed;

  std::size_t n_kept() const { return sigma2_eta.size(); }
  Eigen::Index n_features() const { return beta.empty() ? 0 : beta.front().rows(); }
  Eigen::Index n_responses() const { return beta.empty() ? 0 : beta.front().cols(); }
};

namespace detail {

inline double log_normal_density(double x, double var) {
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + x * x / var);
}

inline double inclusion_probability(double beta, double pi, double slab, double spike) {
  if (pi <= 0.0) return 0.0;
  if (pi >= 1.0) return 1.0;
  const double log_odds = std::log(pi) - std::log1p(-pi) + log_normal_density(beta, slab) -
                          log_normal_density(beta, spike);
  return 1.0 / (1.0 + std::exp(-log_odds));
}

}  // namespace detail

/// Gibbs sampler for A = F B + E, E iid N(0, sigma2_eta), with a per-coefficient
/// spike-and-slab prior. Columns of A are separate regressions that share
/// sigma2_eta. `layer_of[b]` selects the prior triple for feature b.
///
/// Sweep order: B | gamma, sigma2 (joint Gaussian per column), then
/// gamma | B (mixture-density odds), then sigma2 | B (inverse gamma).
inline SsvsChain gibbs_run(const Matrix& f, const Matrix& a, const SsvsPrior& prior,
                           const std::vector<int>& layer_of, int n_iter, int burn, int thin,
                           RngStream stream) {
  prior.validate();
  require(f.rows() > 0 && f.rows() == a.rows(), ErrorKind::dimension,
          "gibbs_run: design " + shape_str(f) + " vs response " + shape_str(a));
  require(f.cols() >= 1 && a.cols() >= 1, ErrorKind::dimension, "gibbs_run: empty design/response");
  require(f.allFinite() && a.allFinite(), ErrorKind::domain, "gibbs_run: non-finite input");
  require(static_cast<Eigen::Index>(layer_of.size()) == f.cols(), ErrorKind::dimension,
          "gibbs_run: layer_of must have one entry per feature");
  for (int l : layer_of)
    require(l >= 0 && static_cast<std::size_t>(l) < prior.layers(), ErrorKind::dimension,
            "gibbs_run: feature layer index out of range");
  require(n_iter > burn && burn >= 0, ErrorKind::config, "gibbs_run: need n_iter > burn >= 0");
  require(thin >= 1, ErrorKind::config, "gibbs_run: thin must be >= 1");

  const Eigen::Index n = f.rows(), q = f.cols(), k = a.cols();
  const Matrix gram = f.transpose() * f;
  const Matrix cross = f.transpose() * a;

  Matrix beta = Matrix::Zero(q, k);
  Mask gamma = Mask::Ones(q, k);
  const double a_mean = a.mean();
  double sigma2 = (a.array() - a_mean).square().sum() / std::max<double>(1.0, static_cast<double>(a.size() - 1));
  if (!(sigma2 > 0.0)) sigma2 = 1.0;  // constant response: any positive start works

  Rng rng(stream);
  std::vector<Rng> column_rngs;
  for (Eigen::Index c = 0; c < k; ++c) column_rngs.emplace_back(stream.substream(static_cast<std::uint64_t>(c) + 1));

  SsvsChain chain;
  chain.n_iter = n_iter;
  chain.burn = burn;
  chain.thin = thin;
  chain.seed = stream;

  for (int it = 0; it < n_iter; ++it) {
    parallel_for(static_cast<std::size_t>(k), [&](std::size_t cu) {
      const auto c = static_cast<Eigen::Index>(cu);
      Rng& r = column_rngs[cu];
      Matrix precision = gram / sigma2;
      for (Eigen::Index b = 0; b < q; ++b) {
        const auto l = static_cast<std::size_t>(layer_of[static_cast<std::size_t>(b)]);
        precision(b, b) += 1.0 / (gamma(b, c) ? prior.sigma2_slab[l] : prior.sigma2_spike[l]);
      }
      Eigen::LLT<Matrix> llt(precision);
      require(llt.info() == Eigen::Success, ErrorKind::singular, "gibbs_run: posterior precision not PD");
      const Vector mean = llt.solve(cross.col(c) / sigma2);
      Vector z(q);
      for (Eigen::Index b = 0; b < q; ++b) z(b) = r.normal();
      beta.col(c) = mean + llt.matrixU().solve(z);
      for (Eigen::Index b = 0; b < q; ++b) {
        const auto l = static_cast<std::size_t>(layer_of[static_cast<std::size_t>(b)]);
        const double p = detail::inclusion_probability(beta(b, c), prior.pi[l], prior.sigma2_slab[l],
                                                       prior.sigma2_spike[l]);
        gamma(b, c) = r.uniform() < p ? 1 : 0;
      }
    });
    const double rss = (a - f * beta).squaredNorm();
    sigma2 = rng.inverse_gamma(prior.alpha_eta + 0.5 * static_cast<double>(n * k),
                               prior.beta_eta + 0.5 * rss);
    if (it >= burn && (it - burn) % thin == 0) {
      chain.beta.push_back(beta);
      chain.gamma.push_back(gamma);
      chain.sigma2_eta.push_back(sigma2);
    }
  }
  return chain;
}

struct SsvsSummary {
  Matrix coef_mean;
  Matrix inclusion_prob;
  Matrix coef_lower;  // 2.5% quantile
  Matrix coef_upper;  // 97.5% quantile
  double sigma2_eta_mean = 0.0;
  double sigma2_eta_lower = 0.0;
  double sigma2_eta_upper = 0.0;
};

inline SsvsSummary posterior_summaries(const SsvsChain& chain) {
  require(chain.n_kept() > 0, ErrorKind::domain, "posterior_summaries: empty chain");
  const Eigen::Index q = chain.n_features(), k = chain.n_responses();
  const double n = static_cast<double>(chain.n_kept());
  SsvsSummary s;
  s.coef_mean = Matrix::Zero(q, k);
  s.inclusion_prob = Matrix::Zero(q, k);
  for (std::size_t d = 0; d < chain.n_kept(); ++d) {
    s.coef_mean += chain.beta[d];
    s.inclusion_prob += chain.gamma[d].cast<double>();
  }
  s.coef_mean /= n;
  s.inclusion_prob /= n;
  s.coef_lower.resize(q, k);
  s.coef_upper.resize(q, k);
  std::vector<double> cell(chain.n_kept());
  for (Eigen::Index b = 0; b < q; ++b)
    for (Eigen::Index c = 0; c < k; ++c) {
      for (std::size_t d = 0; d < cell.size(); ++d) cell[d] = chain.beta[d](b, c);
      s.coef_lower(b, c) = quantile(cell, 0.025);
      s.coef_upper(b, c) = quantile(cell, 0.975);
    }
  double total = 0.0;
  for (double v : chain.sigma2_eta) total += v;
  s.sigma2_eta_mean = total / n;
  s.sigma2_eta_lower = quantile(chain.sigma2_eta, 0.025);
  s.sigma2_eta_upper = quantile(chain.sigma2_eta, 0.975);
  return s;
}

}  // namespace rcast
