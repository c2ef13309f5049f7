#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rcast/error.hpp"
#include "rcast/field.hpp"
#include "rcast/forecast.hpp"
#include "rcast/numerics.hpp"
#include "rcast/parallel.hpp"
#include "rcast/reservoir.hpp"
#include "rcast/rng.hpp"
#include "rcast/ssvs.hpp"

namespace rcast {

/// Deep ESN layout and D-EESN output-stage settings.
///
/// Layer 1 is the shallowest (it feeds the output directly, unreduced);
/// layer L consumes the embedded inputs. Layers 2..L have the fixed width
/// `n_h_deep` and are reduced to `reduced[l-2]` principal components before
/// feeding the layer above and the output stage.
struct DeepEsnConfig {
  int layers = 2;
  std::vector<double> nu{0.3, 0.9};  // per layer, index 0 = layer 1
  int n_h_1 = 30;
  int n_h_deep = 30;
  std::vector<int> reduced{8};  // layers 2..L
  double pi_w = 0.1;
  double pi_u = 0.1;
  double a_w = 0.1;
  double a_u = 0.1;
  EmbeddingSpec embedding;
  double r_v = 1.0;  // ridge penalty of the GA fitness readout
  int lead = 1;
  int burn_in = 30;
  int n_basis = 5;  // response EOFs
  double level = 0.95;
  int n_iter = 2000;
  int mcmc_burn = 500;
  int thin = 2;
  SsvsPrior prior = SsvsPrior::uniform(2, 10.0, 0.001, 0.2);

  ReservoirParams layer_params(int layer) const {
    ReservoirParams p;
    p.n_h = layer == 1 ? n_h_1 : n_h_deep;
    p.pi_w = pi_w;
    p.pi_u = pi_u;
    p.a_w = a_w;
    p.a_u = a_u;
    p.nu = nu[static_cast<std::size_t>(layer - 1)];
    return p;
  }

  void validate() const {
    require(layers >= 1, ErrorKind::config, "deesn: layers must be >= 1");
    require(static_cast<int>(nu.size()) == layers, ErrorKind::config,
            "deesn: nu needs one value per layer");
    require(static_cast<int>(reduced.size()) == layers - 1, ErrorKind::config,
            "deesn: reduced needs one width per layer 2..L");
    for (int r : reduced)
      require(r >= 1 && r <= n_h_deep, ErrorKind::config, "deesn: reduced widths must be in [1, n_h_deep]");
    for (int l = 1; l <= layers; ++l) layer_params(l).validate();
    require(embedding.m >= 0 && embedding.tau >= 1, ErrorKind::config, "deesn: bad embedding");
    require(r_v >= 0.0, ErrorKind::config, "deesn: r_v must be >= 0");
    require(lead >= 1, ErrorKind::config, "deesn: lead must be >= 1");
    require(burn_in >= 0, ErrorKind::config, "deesn: burn_in must be >= 0");
    require(n_basis >= 1, ErrorKind::config, "deesn: n_basis must be >= 1");
    require(level > 0.0 && level < 1.0, ErrorKind::config, "deesn: level must be in (0,1)");
    require(n_iter > mcmc_burn && mcmc_burn >= 0 && thin >= 1, ErrorKind::config,
            "deesn: need n_iter > mcmc_burn >= 0 and thin >= 1");
    prior.validate();
    require(static_cast<int>(prior.layers()) == layers, ErrorKind::config,
            "deesn: prior needs one (slab, spike, pi) triple per layer");
  }
};

/// Per-time-step features of one deep reservoir stack.
struct DeepEsnFeatures {
  Matrix y1;                     // N x n_h_1
  std::vector<Matrix> y_tilde;   // layers 2..L, N x reduced[l-2]
  std::vector<PcaBasis> bases;   // reduction operators for layers 2..L

  Eigen::Index rows() const { return y1.rows(); }
  Eigen::Index width() const {
    Eigen::Index w = y1.cols();
    for (const auto& m : y_tilde) w += m.cols();
    return w;
  }
};

/// Frozen pieces of one ensemble stack needed to regenerate its features.
struct DeepStack {
  std::vector<RngStream> reservoir_seeds;  // accepted stream per layer (index 0 = layer 1)
  std::vector<PcaBasis> bases;             // layers 2..L
};

namespace detail {

/// Runs the stack bottom-up (layer L first). With `frozen` null the
/// reduction bases are fitted on embedded rows [fit_begin, fit_end) and
/// recorded in the returned stack; otherwise the frozen bases are applied.
inline DeepEsnFeatures run_stack(const Matrix& x_embedded, const DeepEsnConfig& cfg,
                                 std::uint64_t base_seed, std::uint64_t member,
                                 const DeepStack* frozen, Eigen::Index fit_begin,
                                 Eigen::Index fit_end, DeepStack* record) {
  const int depth = cfg.layers;
  std::vector<Matrix> states(static_cast<std::size_t>(depth));
  DeepEsnFeatures out;
  out.y_tilde.resize(static_cast<std::size_t>(depth - 1));
  out.bases.resize(static_cast<std::size_t>(depth - 1));
  if (record) record->reservoir_seeds.assign(static_cast<std::size_t>(depth), RngStream{});

  Matrix input = x_embedded;
  for (int layer = depth; layer >= 1; --layer) {
    const auto li = static_cast<std::size_t>(layer - 1);
    const RngStream stream = frozen ? frozen->reservoir_seeds[li]
                                    : RngStream{base_seed, stream_ids::reservoir(member, layer)};
    const Reservoir res = draw_reservoir(cfg.layer_params(layer), input.cols(), stream);
    if (record) record->reservoir_seeds[li] = res.seed;
    states[li] = run_states(res, input);
    if (layer == 1) break;
    const auto bi = static_cast<std::size_t>(layer - 2);
    if (frozen) {
      out.bases[bi] = frozen->bases[bi];
    } else {
      require(fit_end - fit_begin >= 2, ErrorKind::insufficient_history,
              "deep esn: too few rows to fit the reduction stage");
      out.bases[bi] = pca_fit(states[li].middleRows(fit_begin, fit_end - fit_begin),
                              cfg.reduced[bi]);
    }
    out.y_tilde[bi] = pca_project(out.bases[bi], states[li]);
    input = out.y_tilde[bi];
  }
  out.y1 = std::move(states[0]);
  if (record) record->bases = out.bases;
  return out;
}

inline DeepEsnFeatures trim_rows(const DeepEsnFeatures& f, Eigen::Index begin, Eigen::Index count) {
  DeepEsnFeatures out;
  out.y1 = f.y1.middleRows(begin, count);
  for (const auto& m : f.y_tilde) out.y_tilde.push_back(m.middleRows(begin, count));
  out.bases = f.bases;
  return out;
}

/// Column-stacks [y1, y~2..y~L] over ensemble members.
inline Matrix stack_features(const std::vector<DeepEsnFeatures>& members) {
  Eigen::Index width = 0;
  for (const auto& m : members) width += m.width();
  const Eigen::Index rows = members.front().rows();
  Matrix out(rows, width);
  Eigen::Index col = 0;
  for (const auto& m : members) {
    out.middleCols(col, m.y1.cols()) = m.y1;
    col += m.y1.cols();
    for (const auto& t : m.y_tilde) {
      out.middleCols(col, t.cols()) = t;
      col += t.cols();
    }
  }
  return out;
}

inline std::vector<int> feature_layers(const DeepEsnConfig& cfg, int n_res) {
  std::vector<int> layer_of;
  for (int j = 0; j < n_res; ++j) {
    layer_of.insert(layer_of.end(), static_cast<std::size_t>(cfg.n_h_1), 0);
    for (int l = 2; l <= cfg.layers; ++l)
      layer_of.insert(layer_of.end(), static_cast<std::size_t>(cfg.reduced[static_cast<std::size_t>(l - 2)]), l - 1);
  }
  return layer_of;
}

}  // namespace detail

/// Deep reservoir features of the inputs: standardize, embed, run the stack,
/// fit the reduction stages on the post-burn-in rows, then drop the burn-in.
inline DeepEsnFeatures run_deep_states(const Matrix& x, const DeepEsnConfig& cfg,
                                       std::uint64_t base_seed, std::uint64_t member = 0) {
  cfg.validate();
  const Matrix embedded = build_embeddings(Standardizer::fit(x).apply(x), cfg.embedding);
  require(embedded.rows() > cfg.burn_in + 1, ErrorKind::insufficient_history,
          "run_deep_states: burn-in consumes the whole history");
  const auto full = detail::run_stack(embedded, cfg, base_seed, member, nullptr, cfg.burn_in,
                                      embedded.rows(), nullptr);
  return detail::trim_rows(full, cfg.burn_in, embedded.rows() - cfg.burn_in);
}

/// EOF basis of the response field.
struct ResponseBasis {
  Matrix phi;                  // n_y x k, orthonormal
  Vector mean;                 // n_y
  Matrix alpha;                // T x k projection coefficients
  Vector truncation_sigma2;    // n_y, mean squared reconstruction residual
};

inline ResponseBasis fit_response_basis(const Matrix& z, Eigen::Index k) {
  require(k >= 1 && k <= std::min(z.rows(), z.cols()), ErrorKind::dimension,
          "fit_response_basis: k=" + std::to_string(k) + " out of range for " + shape_str(z));
  const PcaBasis pca = pca_fit(z, k);
  ResponseBasis b;
  b.phi = pca.components;
  b.mean = pca.column_means;
  b.alpha = pca_project(pca, z);
  const Matrix resid = (z.rowwise() - b.mean.transpose()) - b.alpha * b.phi.transpose();
  b.truncation_sigma2 = resid.array().square().colwise().mean().transpose();
  return b;
}

inline ResponseBasis fit_response_basis(const FieldSeries& z, Eigen::Index k) {
  return fit_response_basis(z.values(), k);
}

/// Trained D-EESN: frozen deep stacks, response basis, and the posterior
/// chain of the basis-coefficient regression.
struct DeesnModel {
  DeepEsnConfig config;
  int n_res = 1;
  std::uint64_t base_seed = 0;
  std::uint64_t data_fingerprint = 0;
  Standardizer input_scaling;
  ResponseBasis basis;  // alpha holds the training coefficients
  std::vector<DeepStack> stacks;
  Standardizer feature_scaling;
  SsvsChain chain;

  Eigen::Index n_y() const { return basis.phi.rows(); }
};

namespace detail {

inline void check_deesn_history(Eigen::Index total, const DeepEsnConfig& cfg) {
  const Eigen::Index n = total - cfg.embedding.history() - cfg.burn_in - cfg.lead;
  require(n >= 2, ErrorKind::insufficient_history,
          "deesn: " + std::to_string(total) + " time steps leave fewer than 2 training pairs");
}

/// Stacked training design: rows are embedded rows [burn_in, burn_in + n),
/// paired with responses n rows later by `lead`.
struct DeepDesign {
  Standardizer input_scaling;
  std::vector<DeepStack> stacks;
  Matrix features;  // raw stacked features, n x q
  Eigen::Index first_target = 0;  // time row of the first target
  Eigen::Index n = 0;
};

inline DeepDesign deep_design(const Matrix& x, const DeepEsnConfig& cfg, int n_res,
                              std::uint64_t base_seed) {
  check_deesn_history(x.rows(), cfg);
  DeepDesign d;
  d.input_scaling = Standardizer::fit(x);
  const Matrix embedded = build_embeddings(d.input_scaling.apply(x), cfg.embedding);
  const Eigen::Index lag = cfg.embedding.history();
  d.n = x.rows() - lag - cfg.burn_in - cfg.lead;
  d.first_target = lag + cfg.burn_in + cfg.lead;
  d.stacks.resize(static_cast<std::size_t>(n_res));
  std::vector<DeepEsnFeatures> members(static_cast<std::size_t>(n_res));
  parallel_for(members.size(), [&](std::size_t j) {
    // reduction bases are fitted on the rows that enter the regression
    const auto full = run_stack(embedded, cfg, base_seed, j, nullptr, cfg.burn_in,
                                cfg.burn_in + d.n, &d.stacks[j]);
    members[j] = trim_rows(full, cfg.burn_in, d.n);
  });
  d.features = stack_features(members);
  return d;
}

/// Stacked (raw) features for the last `horizon` rows of a history.
inline Matrix deep_features_apply(const Matrix& x_recent, const DeepEsnConfig& cfg,
                                  const Standardizer& input_scaling,
                                  const std::vector<DeepStack>& stacks, int horizon) {
  const Eigen::Index lag = cfg.embedding.history();
  require(x_recent.rows() >= lag + horizon, ErrorKind::insufficient_history,
          "deesn forecast: history of " + std::to_string(x_recent.rows()) +
              " rows is shorter than m*tau + H = " + std::to_string(lag + horizon));
  const Matrix embedded = build_embeddings(input_scaling.apply(x_recent), cfg.embedding);
  std::vector<DeepEsnFeatures> members(stacks.size());
  parallel_for(stacks.size(), [&](std::size_t j) {
    const auto full = run_stack(embedded, cfg, 0, j, &stacks[j], 0, 0, nullptr);
    members[j] = trim_rows(full, embedded.rows() - horizon, horizon);
  });
  return stack_features(members);
}

}  // namespace detail

/// Fits the D-EESN: response EOFs, n_res deep stacks with distinct
/// reservoir draws, and the SSVS regression of alpha_{t+lead} on the
/// standardized stacked features at t.
inline DeesnModel fit_deesn(const FieldSeries& z, const Matrix& x, const DeepEsnConfig& cfg,
                            int n_res, std::uint64_t base_seed) {
  cfg.validate();
  require(n_res >= 1, ErrorKind::config, "n_res must be >= 1");
  require(x.rows() == z.n_times(), ErrorKind::dimension, "fit_deesn: inputs not aligned with responses");
  auto design = detail::deep_design(x, cfg, n_res, base_seed);

  DeesnModel model;
  model.config = cfg;
  model.n_res = n_res;
  model.base_seed = base_seed;
  model.data_fingerprint = fingerprint(z);
  model.input_scaling = design.input_scaling;
  model.stacks = std::move(design.stacks);
  model.basis = fit_response_basis(z.values(), cfg.n_basis);
  model.feature_scaling = Standardizer::fit(design.features);
  const Matrix f = model.feature_scaling.apply(design.features);
  const Matrix a = model.basis.alpha.middleRows(design.first_target, design.n);
  model.chain = gibbs_run(f, a, cfg.prior, detail::feature_layers(cfg, n_res), cfg.n_iter,
                          cfg.mcmc_burn, cfg.thin, RngStream{base_seed, stream_ids::gibbs});
  return model;
}

/// Posterior predictive sample for the last `horizon` rows of the history.
/// Uses `n_draws` kept draws spread evenly over the chain (0 = all of them).
inline EnsembleForecast forecast_deesn(const DeesnModel& model, const Matrix& x_recent, int horizon,
                                       std::optional<std::size_t> n_draws = std::nullopt,
                                       bool add_noise = true) {
  require(horizon >= 1, ErrorKind::config, "forecast_deesn: horizon must be >= 1");
  const std::size_t kept = model.chain.n_kept();
  const std::size_t draws = n_draws ? *n_draws : kept;
  require(draws >= 1, ErrorKind::domain, "forecast_deesn: zero posterior draws requested");
  require(kept >= 1, ErrorKind::domain, "forecast_deesn: model chain is empty");
  const std::size_t use = std::min(draws, kept);

  const auto& cfg = model.config;
  const Matrix f = model.feature_scaling.apply(
      detail::deep_features_apply(x_recent, cfg, model.input_scaling, model.stacks, horizon));

  EnsembleForecast fc;
  fc.level = cfg.level;
  fc.lead = cfg.lead;
  for (int h = 0; h < horizon; ++h) fc.origin_rows.push_back(x_recent.rows() - horizon + h);
  fc.member_values.resize(use);
  const Vector trunc_sd = model.basis.truncation_sigma2.cwiseSqrt();
  parallel_for(use, [&](std::size_t s) {
    const std::size_t d = use == kept ? s : (s * kept) / use;
    Matrix alpha = f * model.chain.beta[d];
    Rng rng(RngStream{model.base_seed, stream_ids::forecast_noise}.substream(d));
    if (add_noise) {
      const double sd = std::sqrt(model.chain.sigma2_eta[d]);
      for (Eigen::Index t = 0; t < alpha.rows(); ++t)
        for (Eigen::Index c = 0; c < alpha.cols(); ++c) alpha(t, c) += sd * rng.normal();
    }
    Matrix zhat = (alpha * model.basis.phi.transpose()).rowwise() + model.basis.mean.transpose();
    if (add_noise)
      for (Eigen::Index t = 0; t < zhat.rows(); ++t)
        for (Eigen::Index i = 0; i < zhat.cols(); ++i) zhat(t, i) += trunc_sd(i) * rng.normal();
    fc.member_values[s] = std::move(zhat);
  });
  summarize(fc);
  return fc;
}

// ---------------------------------------------------------------------------
// genetic-algorithm hyperparameter search

struct GaSearchSpace {
  double nu_min = 0.05, nu_max = 0.99;      // every layer
  int reduced_min = 2, reduced_max = 10;    // every reduction stage
  int n_h_1_min = 10, n_h_1_max = 60;
  double r_v_min = 1e-3, r_v_max = 1e2;     // searched on a log10 scale
  int m_min = 0, m_max = 4;

  void validate(const DeepEsnConfig& base) const {
    require(nu_min >= 0.0 && nu_max <= 1.0 && nu_min <= nu_max, ErrorKind::config,
            "ga: empty or invalid nu range");
    require(reduced_min >= 1 && reduced_min <= reduced_max && reduced_max <= base.n_h_deep,
            ErrorKind::config, "ga: empty or invalid reduced-width range");
    require(n_h_1_min >= 1 && n_h_1_min <= n_h_1_max, ErrorKind::config, "ga: empty n_h_1 range");
    require(r_v_min > 0.0 && r_v_min <= r_v_max, ErrorKind::config, "ga: empty r_v range");
    require(m_min >= 0 && m_min <= m_max, ErrorKind::config, "ga: empty m range");
  }
};

struct GaSettings {
  int population = 20;
  int max_generations = 15;
  int tournament = 3;
  double crossover = 0.5;  // per-gene swap probability
  double mutation = 0.2;   // per-gene mutation probability
  int elitism = 2;
  int fitness_members = 3;  // ensemble stacks in the ridge surrogate
};

/// Genome: nu_1..nu_L, reduced_2..reduced_L, n_h_1, log10(r_v), m.
struct GaIndividual {
  std::vector<double> genes;
  double fitness = std::numeric_limits<double>::infinity();
};

struct GaGeneration {
  int generation = 0;
  double best = 0.0;          // best fitness in this generation
  double best_so_far = 0.0;
  double mean = 0.0;          // over finite fitnesses
};

struct GaResult {
  DeepEsnConfig best;
  double best_fitness = std::numeric_limits<double>::infinity();
  std::vector<GaGeneration> trace;
  int evaluations = 0;
};

namespace detail {

struct GeneInfo {
  double lo, hi;
  bool integer;
};

inline std::vector<GeneInfo> gene_layout(const DeepEsnConfig& base, const GaSearchSpace& space) {
  std::vector<GeneInfo> g;
  for (int l = 0; l < base.layers; ++l) g.push_back({space.nu_min, space.nu_max, false});
  for (int l = 1; l < base.layers; ++l)
    g.push_back({double(space.reduced_min), double(space.reduced_max), true});
  g.push_back({double(space.n_h_1_min), double(space.n_h_1_max), true});
  g.push_back({std::log10(space.r_v_min), std::log10(space.r_v_max), false});
  g.push_back({double(space.m_min), double(space.m_max), true});
  return g;
}

inline DeepEsnConfig decode(const DeepEsnConfig& base, const std::vector<double>& genes) {
  DeepEsnConfig cfg = base;
  std::size_t i = 0;
  for (int l = 0; l < base.layers; ++l) cfg.nu[static_cast<std::size_t>(l)] = genes[i++];
  for (int l = 1; l < base.layers; ++l)
    cfg.reduced[static_cast<std::size_t>(l - 1)] = static_cast<int>(std::lround(genes[i++]));
  cfg.n_h_1 = static_cast<int>(std::lround(genes[i++]));
  cfg.r_v = std::pow(10.0, genes[i++]);
  cfg.embedding.m = static_cast<int>(std::lround(genes[i++]));
  return cfg;
}

inline std::vector<double> random_genome(const std::vector<GeneInfo>& layout, Rng& rng) {
  std::vector<double> g;
  for (const auto& info : layout)
    g.push_back(info.integer ? double(rng.uniform_int(std::int64_t(info.lo), std::int64_t(info.hi)))
                             : rng.uniform(info.lo, info.hi));
  return g;
}

}  // namespace detail

/// Validation MSPE of a ridge readout on deep features: fit on the first 80%
/// of the time axis, score the final 20%.
inline double deep_ridge_fitness(const FieldSeries& z, const Matrix& x, const DeepEsnConfig& cfg,
                                 int n_members, std::uint64_t base_seed) {
  cfg.validate();
  const Eigen::Index total = z.n_times();
  const Eigen::Index n_train = static_cast<Eigen::Index>(std::floor(0.8 * static_cast<double>(total)));
  const Eigen::Index n_valid = total - n_train;
  require(n_valid >= cfg.lead, ErrorKind::insufficient_history,
          "deep fitness: validation window shorter than lead");
  const Matrix x_train = x.topRows(n_train);
  const Matrix z_train = z.values().topRows(n_train);
  auto design = detail::deep_design(x_train, cfg, n_members, base_seed);
  const Eigen::Index k = std::min<Eigen::Index>(cfg.n_basis, std::min(z_train.rows(), z_train.cols()));
  const ResponseBasis basis = fit_response_basis(z_train, k);
  const Standardizer scaling = Standardizer::fit(design.features);
  const Matrix coef = ridge_solve(scaling.apply(design.features),
                                  basis.alpha.middleRows(design.first_target, design.n), cfg.r_v);
  const Matrix f_valid = scaling.apply(detail::deep_features_apply(
      x.topRows(total - cfg.lead), cfg, design.input_scaling, design.stacks, static_cast<int>(n_valid)));
  const Matrix pred = ((f_valid * coef) * basis.phi.transpose()).rowwise() + basis.mean.transpose();
  const Matrix truth = z.values().bottomRows(n_valid);
  return (pred - truth).squaredNorm() / static_cast<double>(truth.size());
}

/// Elitist GA over the deep ESN hyperparameters. Number of generations is
/// budget / population, capped at settings.max_generations and at least 1.
inline GaResult ga_tune(const FieldSeries& z, const Matrix& x, const DeepEsnConfig& base,
                        const GaSearchSpace& space, int budget, std::uint64_t base_seed,
                        const GaSettings& settings = {}) {
  space.validate(base);
  require(budget >= 1, ErrorKind::config, "ga: budget must be >= 1");
  require(settings.population >= 2 && settings.elitism >= 0 && settings.elitism < settings.population &&
              settings.tournament >= 1,
          ErrorKind::config, "ga: invalid settings");
  const auto layout = detail::gene_layout(base, space);
  const int generations =
      std::clamp(budget / settings.population, 1, std::max(1, settings.max_generations));

  Rng rng(RngStream{base_seed, stream_ids::genetic});
  GaResult result;
  auto evaluate = [&](std::vector<GaIndividual>& pop, std::size_t from) {
    parallel_for(pop.size() - from, [&](std::size_t i) {
      auto& ind = pop[from + i];
      try {
        ind.fitness = deep_ridge_fitness(z, x, detail::decode(base, ind.genes),
                                         settings.fitness_members, base_seed);
        if (!std::isfinite(ind.fitness)) ind.fitness = std::numeric_limits<double>::infinity();
      } catch (const Error&) {
        ind.fitness = std::numeric_limits<double>::infinity();
      }
    });
    result.evaluations += static_cast<int>(pop.size() - from);
  };
  auto record = [&](const std::vector<GaIndividual>& pop, int gen) {
    GaGeneration g;
    g.generation = gen;
    g.best = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    int finite = 0;
    for (const auto& ind : pop) {
      g.best = std::min(g.best, ind.fitness);
      if (std::isfinite(ind.fitness)) {
        sum += ind.fitness;
        ++finite;
      }
      if (ind.fitness < result.best_fitness) {
        result.best_fitness = ind.fitness;
        result.best = detail::decode(base, ind.genes);
      }
    }
    g.best_so_far = result.best_fitness;
    g.mean = finite ? sum / finite : std::numeric_limits<double>::infinity();
    result.trace.push_back(g);
  };

  std::vector<GaIndividual> pop(static_cast<std::size_t>(settings.population));
  for (auto& ind : pop) ind.genes = detail::random_genome(layout, rng);
  evaluate(pop, 0);
  record(pop, 1);

  auto tournament = [&](const std::vector<GaIndividual>& p) -> const GaIndividual& {
    std::size_t best = static_cast<std::size_t>(rng.uniform_int(0, std::int64_t(p.size()) - 1));
    for (int t = 1; t < settings.tournament; ++t) {
      const auto c = static_cast<std::size_t>(rng.uniform_int(0, std::int64_t(p.size()) - 1));
      if (p[c].fitness < p[best].fitness) best = c;
    }
    return p[best];
  };

  for (int gen = 2; gen <= generations; ++gen) {
    std::vector<GaIndividual> sorted = pop;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.fitness < b.fitness; });
    std::vector<GaIndividual> next(sorted.begin(), sorted.begin() + settings.elitism);
    while (static_cast<int>(next.size()) < settings.population) {
      const auto& p1 = tournament(pop);
      const auto& p2 = tournament(pop);
      GaIndividual child;
      child.genes = p1.genes;
      for (std::size_t g = 0; g < layout.size(); ++g) {
        if (rng.uniform() < settings.crossover) child.genes[g] = p2.genes[g];
        if (rng.uniform() < settings.mutation) {
          const auto& info = layout[g];
          if (info.integer) {
            child.genes[g] = double(rng.uniform_int(std::int64_t(info.lo), std::int64_t(info.hi)));
          } else {
            child.genes[g] = std::clamp(child.genes[g] + 0.1 * (info.hi - info.lo) * rng.normal(),
                                        info.lo, info.hi);
          }
        }
      }
      next.push_back(std::move(child));
    }
    evaluate(next, static_cast<std::size_t>(settings.elitism));
    pop = std::move(next);
    record(pop, gen);
  }
  require(std::isfinite(result.best_fitness), ErrorKind::singular,
          "ga: no individual produced a finite fitness");
  return result;
}

/// Random search at a fixed evaluation budget over the same space; returns
/// every evaluated fitness in draw order.
inline std::vector<double> random_search(const FieldSeries& z, const Matrix& x, const DeepEsnConfig& base,
                                         const GaSearchSpace& space, int budget, std::uint64_t base_seed,
                                         std::uint64_t search_seed, int fitness_members = 3) {
  space.validate(base);
  const auto layout = detail::gene_layout(base, space);
  Rng rng(RngStream{search_seed, stream_ids::sampling});
  std::vector<std::vector<double>> genomes;
  for (int i = 0; i < budget; ++i) genomes.push_back(detail::random_genome(layout, rng));
  std::vector<double> scores(genomes.size());
  parallel_for(genomes.size(), [&](std::size_t i) {
    try {
      scores[i] = deep_ridge_fitness(z, x, detail::decode(base, genomes[i]), fitness_members, base_seed);
    } catch (const Error&) {
      scores[i] = std::numeric_limits<double>::infinity();
    }
  });
  return scores;
}

}  // namespace rcast
