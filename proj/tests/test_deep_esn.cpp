#include <gtest/gtest.h>

#include <cmath>

#include "rcast/deep_esn.hpp"
#include "rcast/simulate.hpp"
#include "support.hpp"

using namespace rcast;
namespace ts = testing_support;

namespace {

DeepEsnConfig small_config(int layers) {
  DeepEsnConfig c;
  c.layers = layers;
  c.nu.assign(static_cast<std::size_t>(layers), 0.5);
  c.n_h_1 = 12;
  c.n_h_deep = 10;
  c.reduced.assign(static_cast<std::size_t>(layers - 1), 4);
  c.burn_in = 10;
  c.n_basis = 3;
  c.n_iter = 600;
  c.mcmc_burn = 200;
  c.thin = 2;
  c.prior = SsvsPrior::uniform(static_cast<std::size_t>(layers), 10.0, 0.001, 0.2);
  return c;
}

double ols_rss(const Matrix& f, const Matrix& y) {
  Matrix design(f.rows(), f.cols() + 1);
  design << Matrix::Ones(f.rows(), 1), f;
  const Matrix coef = design.colPivHouseholderQr().solve(y);
  return (y - design * coef).squaredNorm();
}

}  // namespace

TEST(DeepStates, SingleLayerEqualsShallowPipeline) {
  ts::Gen g(1);
  const Matrix x = g.matrix(80, 3);
  auto cfg = small_config(1);
  cfg.embedding = {1, 1};
  const auto deep = run_deep_states(x, cfg, 17, 4);
  EXPECT_TRUE(deep.y_tilde.empty());

  const Matrix emb = build_embeddings(Standardizer::fit(x).apply(x), cfg.embedding);
  const Reservoir r = draw_reservoir(cfg.layer_params(1), emb.cols(), RngStream{17, 4});
  const Matrix shallow = run_states(r, emb).bottomRows(emb.rows() - cfg.burn_in);
  EXPECT_EQ(deep.y1, shallow);
}

TEST(DeepStates, FullRankReductionIsARotation) {
  ts::Gen g(2);
  const Matrix x = g.matrix(120, 2);
  auto cfg = small_config(2);
  cfg.reduced = {cfg.n_h_deep};
  const auto deep = run_deep_states(x, cfg, 5, 0);

  // raw layer-2 states, regenerated independently
  const Matrix emb = build_embeddings(Standardizer::fit(x).apply(x), cfg.embedding);
  const Reservoir r2 = draw_reservoir(cfg.layer_params(2), emb.cols(), RngStream{5, stream_ids::reservoir(0, 2)});
  const Matrix raw = run_states(r2, emb).bottomRows(emb.rows() - cfg.burn_in);

  const Matrix y = g.matrix(deep.rows(), 2);
  Matrix with_reduced(deep.rows(), deep.width()), with_raw(deep.rows(), deep.y1.cols() + raw.cols());
  with_reduced << deep.y1, deep.y_tilde[0];
  with_raw << deep.y1, raw;
  const double a = ols_rss(with_reduced, y), b = ols_rss(with_raw, y);
  EXPECT_NEAR(a, b, 1e-8 * b);
  // the reduction basis is square and orthonormal
  const Matrix v = deep.bases[0].components;
  EXPECT_LT(ts::max_abs(v.transpose() * v - Matrix::Identity(v.cols(), v.cols())), 1e-10);
}

TEST(DeepStates, LayerWidthsHonoured) {
  ts::Gen g(3);
  const Matrix x = g.matrix(90, 4);
  auto cfg = small_config(3);
  cfg.reduced = {3, 6};
  cfg.embedding = {2, 2};
  const auto f = run_deep_states(x, cfg, 9, 1);
  const Eigen::Index n = 90 - 4 - cfg.burn_in;
  EXPECT_EQ(f.y1.rows(), n);
  EXPECT_EQ(f.y1.cols(), 12);
  ASSERT_EQ(f.y_tilde.size(), 2u);
  EXPECT_EQ(f.y_tilde[0].rows(), n);
  EXPECT_EQ(f.y_tilde[0].cols(), 3);
  EXPECT_EQ(f.y_tilde[1].cols(), 6);
  EXPECT_EQ(f.width(), 21);
}

TEST(ResponseBasis, FullRankIsExact) {
  ts::Gen g(4);
  const Matrix z = g.matrix(30, 6);
  const auto b = fit_response_basis(z, 6);
  EXPECT_LT(b.truncation_sigma2.maxCoeff(), 1e-20);
  const Matrix back = (b.alpha * b.phi.transpose()).rowwise() + b.mean.transpose();
  EXPECT_LT(ts::max_abs(back - z), 1e-10);
}

TEST(ResponseBasis, RankOneField) {
  ts::Gen g(5);
  const Vector u = g.matrix(40, 1), w = g.matrix(8, 1);
  const Matrix z = u * w.transpose();
  const auto b = fit_response_basis(z, 1);
  EXPECT_LT(b.truncation_sigma2.maxCoeff(), 1e-20);
  EXPECT_NEAR(std::abs(b.phi.col(0).dot(w.normalized())), 1.0, 1e-10);
}

TEST(ResponseBasis, MatchesEigenOracle) {
  ts::Gen g(6);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix z = g.matrix(g.integer(12, 40), g.integer(3, 9));
    const Eigen::Index k = g.integer(1, static_cast<int>(z.cols()));
    const auto b = fit_response_basis(z, k);
    const Matrix vecs = ts::scatter_eigenvectors(z);
    EXPECT_LT(ts::max_abs(b.phi.transpose() * b.phi - Matrix::Identity(k, k)), 1e-10);
    for (Eigen::Index c = 0; c < k; ++c) EXPECT_NEAR(std::abs(b.phi.col(c).dot(vecs.col(c))), 1.0, 1e-8);
    const Matrix centered = z.rowwise() - z.colwise().mean();
    EXPECT_LT(ts::max_abs(b.alpha - centered * b.phi), 1e-10);
    const Matrix resid = centered - b.alpha * b.phi.transpose();
    for (Eigen::Index i = 0; i < z.cols(); ++i)
      EXPECT_NEAR(b.truncation_sigma2(i), resid.col(i).squaredNorm() / static_cast<double>(z.rows()), 1e-12);
  }
  EXPECT_THROW(fit_response_basis(Matrix::Zero(5, 3), 4), Error);
  EXPECT_THROW(fit_response_basis(Matrix::Zero(5, 3), 0), Error);
}

TEST(FitDeesn, FlatSlabMatchesLeastSquares) {
  const auto data = multiscale_benchmark(3, 8, 200);
  const auto& z = data.field;
  auto cfg = small_config(1);
  cfg.n_basis = 2;
  cfg.prior = SsvsPrior::uniform(1, 1e8, 1e-3, 1.0);
  cfg.n_iter = 3000;
  cfg.mcmc_burn = 500;
  const auto model = fit_deesn(z, z.values(), cfg, 1, 6);

  const auto design = detail::deep_design(z.values(), cfg, 1, 6);
  const Matrix f = model.feature_scaling.apply(design.features);
  const Matrix a = model.basis.alpha.middleRows(design.first_target, design.n);
  const Matrix ols = ts::ridge_inverse(f, a, 0.0);
  const auto s = posterior_summaries(model.chain);
  for (Eigen::Index b = 0; b < ols.rows(); ++b)
    for (Eigen::Index c = 0; c < ols.cols(); ++c) {
      std::vector<double> draws;
      for (const auto& d : model.chain.beta) draws.push_back(d(b, c));
      const double sd = (ts::quantile_naive(draws, 0.8413) - ts::quantile_naive(draws, 0.1587)) / 2.0;
      EXPECT_NEAR(s.coef_mean(b, c), ols(b, c), 5.0 * sd / std::sqrt(double(draws.size())) + 1e-6)
          << "(" << b << "," << c << ")";
    }
}

TEST(FitDeesn, ZeroResponseConcentratesAtZero) {
  ts::Gen g(7);
  const Matrix x = g.matrix(100, 3);
  const auto z = FieldSeries::from_matrix(Matrix::Zero(100, 5));
  const auto model = fit_deesn(z, x, small_config(2), 2, 3);
  const auto s = posterior_summaries(model.chain);
  for (Eigen::Index b = 0; b < s.coef_mean.rows(); ++b)
    for (Eigen::Index c = 0; c < s.coef_mean.cols(); ++c) {
      std::vector<double> draws;
      for (const auto& d : model.chain.beta) draws.push_back(d(b, c));
      // draws are a spike/slab scale mixture, so compare with the full sd,
      // not a quantile half-width that only sees the spike
      double m = 0.0, v = 0.0;
      for (double d : draws) m += d / double(draws.size());
      for (double d : draws) v += (d - m) * (d - m) / double(draws.size() - 1);
      EXPECT_LT(std::abs(s.coef_mean(b, c)), std::sqrt(v)) << "(" << b << "," << c << ")";
    }
}

TEST(FitDeesn, DeterministicAndShaped) {
  const auto data = multiscale_benchmark(4, 10, 150);
  const auto& z = data.field;
  const auto cfg = small_config(2);
  const auto a = fit_deesn(z, z.values(), cfg, 3, 8);
  const auto b = fit_deesn(z, z.values(), cfg, 3, 8);
  ASSERT_EQ(a.chain.n_kept(), b.chain.n_kept());
  for (std::size_t d = 0; d < a.chain.n_kept(); ++d) {
    EXPECT_EQ(a.chain.beta[d], b.chain.beta[d]);
    EXPECT_EQ(a.chain.sigma2_eta[d], b.chain.sigma2_eta[d]);
  }
  EXPECT_EQ(a.chain.n_features(), 3 * (12 + 4));
  EXPECT_EQ(a.chain.n_responses(), 3);
  EXPECT_EQ(a.chain.n_kept(), 200u);
  EXPECT_EQ(a.stacks.size(), 3u);
}

TEST(ForecastDeesn, ZeroDrawsIsError) {
  const auto data = multiscale_benchmark(5, 6, 120);
  const auto model = fit_deesn(data.field, data.field.values(), small_config(1), 1, 2);
  EXPECT_THROW(forecast_deesn(model, data.field.values(), 3, std::size_t{0}), Error);
  EXPECT_THROW(forecast_deesn(model, data.field.values().topRows(2), 3), Error);
}

TEST(ForecastDeesn, NoiseOffSpreadComesFromCoefficients) {
  const auto data = multiscale_benchmark(6, 6, 140);
  auto cfg = small_config(2);
  cfg.n_basis = 6;  // no truncation residual
  auto model = fit_deesn(data.field, data.field.values(), cfg, 2, 4);
  EXPECT_LT(model.basis.truncation_sigma2.maxCoeff(), 1e-20);

  const auto quiet = forecast_deesn(model, data.field.values(), 5, std::nullopt, false);
  for (auto& s2 : model.chain.sigma2_eta) s2 = 0.0;
  const auto limit = forecast_deesn(model, data.field.values(), 5);
  ASSERT_EQ(quiet.n_members(), limit.n_members());
  for (Eigen::Index s = 0; s < quiet.n_members(); ++s)
    EXPECT_LT(ts::max_abs(quiet.member_values[s] - limit.member_values[s]), 1e-12);

  // each member is the basis image of F beta for its draw
  const Matrix f = model.feature_scaling.apply(
      detail::deep_features_apply(data.field.values(), cfg, model.input_scaling, model.stacks, 5));
  const Matrix expect = ((f * model.chain.beta[7]) * model.basis.phi.transpose()).rowwise() +
                        model.basis.mean.transpose();
  EXPECT_LT(ts::max_abs(quiet.member_values[7] - expect), 1e-12);
  EXPECT_GT((quiet.upper - quiet.lower).maxCoeff(), 0.0);
  EXPECT_TRUE((quiet.lower.array() <= quiet.upper.array()).all());
}

TEST(ForecastDeesn, ThinnedDrawSubset) {
  const auto data = multiscale_benchmark(7, 6, 120);
  const auto model = fit_deesn(data.field, data.field.values(), small_config(1), 1, 2);
  const auto fc = forecast_deesn(model, data.field.values(), 2, std::size_t{10});
  EXPECT_EQ(fc.n_members(), 10);
  EXPECT_EQ(fc.origin_rows.back(), 119);
}

TEST(ForecastDeesn, MultiscaleCoverage) {
  const auto data = multiscale_benchmark(11);
  const auto& z = data.field;
  const auto train = z.slice(0, 500);
  DeepEsnConfig cfg;
  cfg.prior = SsvsPrior::uniform(2, 10.0, 0.001, 0.2);
  const auto model = fit_deesn(train, train.values(), cfg, 2, 11);
  const auto fc = forecast_deesn(model, z.values().topRows(599), 100);
  const Matrix truth = z.values().bottomRows(100);
  const double coverage =
      ((truth.array() >= fc.lower.array()) && (truth.array() <= fc.upper.array())).cast<double>().mean();
  EXPECT_GE(coverage, 0.88);
  EXPECT_LE(coverage, 0.99);
}

TEST(GeneticSearch, OneGenerationIsBestOfInitialPopulation) {
  const auto data = multiscale_benchmark(8, 8, 160);
  const auto& z = data.field;
  auto base = small_config(2);
  GaSearchSpace space;
  space.n_h_1_max = 20;
  space.reduced_max = 6;
  space.m_max = 2;
  const auto ga = ga_tune(z, z.values(), base, space, 20, 3);
  EXPECT_EQ(ga.trace.size(), 1u);
  EXPECT_EQ(ga.evaluations, 20);

  Rng rng(RngStream{3, stream_ids::genetic});
  const auto layout = detail::gene_layout(base, space);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20; ++i) {
    const auto genes = detail::random_genome(layout, rng);
    try {
      best = std::min(best, deep_ridge_fitness(z, z.values(), detail::decode(base, genes), 3, 3));
    } catch (const Error&) {
    }
  }
  EXPECT_EQ(ga.best_fitness, best);
  EXPECT_EQ(deep_ridge_fitness(z, z.values(), ga.best, 3, 3), best);
}

TEST(GeneticSearch, ElitistTraceIsMonotone) {
  const auto data = multiscale_benchmark(9, 8, 160);
  const auto& z = data.field;
  GaSearchSpace space;
  space.n_h_1_max = 20;
  space.reduced_max = 6;
  const auto ga = ga_tune(z, z.values(), small_config(2), space, 80, 5);
  ASSERT_EQ(ga.trace.size(), 4u);
  EXPECT_EQ(ga.evaluations, 20 + 3 * 18);
  for (std::size_t g = 1; g < ga.trace.size(); ++g) {
    EXPECT_LE(ga.trace[g].best_so_far, ga.trace[g - 1].best_so_far);
    EXPECT_LE(ga.trace[g].best, ga.trace[g - 1].best);
  }
  EXPECT_EQ(ga.trace.back().best_so_far, ga.best_fitness);
}

TEST(GeneticSearch, GenomeDecodesWithinSpace) {
  auto base = small_config(3);
  GaSearchSpace space;
  space.reduced_max = 7;
  const auto layout = detail::gene_layout(base, space);
  ASSERT_EQ(layout.size(), 3u + 2u + 3u);
  Rng rng(RngStream{1, 1});
  for (int i = 0; i < 200; ++i) {
    const auto cfg = detail::decode(base, detail::random_genome(layout, rng));
    for (double nu : cfg.nu) EXPECT_TRUE(nu >= space.nu_min && nu <= space.nu_max);
    for (int r : cfg.reduced) EXPECT_TRUE(r >= space.reduced_min && r <= space.reduced_max);
    EXPECT_TRUE(cfg.n_h_1 >= space.n_h_1_min && cfg.n_h_1 <= space.n_h_1_max);
    EXPECT_TRUE(cfg.r_v >= space.r_v_min * (1 - 1e-12) && cfg.r_v <= space.r_v_max * (1 + 1e-12));
    EXPECT_TRUE(cfg.embedding.m >= space.m_min && cfg.embedding.m <= space.m_max);
  }
}

TEST(GeneticSearch, EmptySpaceIsError) {
  const auto data = multiscale_benchmark(10, 6, 100);
  GaSearchSpace space;
  space.nu_min = 0.8;
  space.nu_max = 0.2;
  try {
    ga_tune(data.field, data.field.values(), small_config(2), space, 20, 1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
}

TEST(Marginalization, EmpiricalCovarianceMatches) {
  ts::Gen g(12);
  const Eigen::Index n = 10, k = 3;
  const Matrix phi = g.matrix(n, k);
  const Matrix la = g.matrix(k, k);
  const Matrix c_alpha = la * la.transpose() + 0.1 * Matrix::Identity(k, k);
  Vector nug(n);
  for (Eigen::Index i = 0; i < n; ++i) nug(i) = g.unif(0.2, 1.0);
  const Matrix c_nu = nug.asDiagonal();
  const Vector trend = g.matrix(n, 1);
  const Matrix draws = sample_basis_field(trend, phi, c_alpha, c_nu, 20000, RngStream{12, 1});
  const Matrix sigma = basis_marginal_covariance(phi, c_alpha, c_nu);
  const Matrix centered = draws.rowwise() - draws.colwise().mean();
  const Matrix emp = centered.transpose() * centered / 19999.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double se = std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / 20000.0);
      EXPECT_LT(std::abs(emp(i, j) - sigma(i, j)), 3.0 * se) << "(" << i << "," << j << ")";
    }
  EXPECT_LT(ts::max_abs(draws.colwise().mean().transpose() - trend), 0.1);
}
