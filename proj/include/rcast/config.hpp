#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcast/baselines.hpp"
#include "rcast/deep_esn.hpp"
#include "rcast/error.hpp"
#include "rcast/field.hpp"
#include "rcast/qeesn.hpp"

namespace rcast {

using json = nlohmann::ordered_json;

enum class ModelKind { qeesn, deesn, kriging, persistence, climatology };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::qeesn: return "qeesn";
    case ModelKind::deesn: return "deesn";
    case ModelKind::kriging: return "kriging";
    case ModelKind::persistence: return "persistence";
    case ModelKind::climatology: return "climatology";
  }
  return "?";
}

/// Synthetic data generator settings (the `simulate` block).
struct SimulateConfig {
  int steps = 700;  // key "T"
  int n_y = 50;
  int p = 5;
  double noise_sd = 1.0;       // latent innovation sd
  double obs_sd = 0.1;         // observation noise sd
  double linear_radius = 0.7;  // gqn
  double quad_scale = 0.1;     // gqn
  double quad_density = 0.3;   // gqn
  double ar_coef = 0.9;        // linear: M = ar_coef * I
  double range = 0.2;          // linear: exponential spatial range of C_eta
  int n_fast = 2;              // multiscale
  int n_slow = 2;              // multiscale
};

struct ModelConfig {
  ModelKind model = ModelKind::qeesn;
  std::uint64_t seed = 42;
  int n_res = 100;
  QeesnHyper qeesn;
  QeesnGrid cv_grid{{20, 40, 60}, {0.2, 0.5, 0.8}, {0.01, 0.1, 1.0}};
  DeepEsnConfig deesn;
  std::optional<std::size_t> n_draws;  // deesn posterior draws used in forecasts
  GaSearchSpace ga_space;
  GaSettings ga;
  int ga_budget = 60;
  KrigingForecaster kriging;
  SimulateConfig simulate;
  int baseline_lead = 1;

  int lead() const {
    switch (model) {
      case ModelKind::qeesn: return qeesn.lead;
      case ModelKind::deesn: return deesn.lead;
      case ModelKind::kriging: return kriging.lead;
      default: return baseline_lead;
    }
  }
};

namespace detail {

/// Reads keys of one JSON object, remembering which were consumed so that
/// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    require(obj_.is_object(), ErrorKind::config, where() + ": expected a JSON object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  template <typename T>
  bool get(const std::string& key, T& out) {
    if (!obj_.contains(key)) return false;
    seen_.insert(key);
    try {
      const auto& v = obj_.at(key);
      if constexpr (std::is_same_v<T, bool>) {
        require(v.is_boolean(), ErrorKind::config, key_path(key) + ": expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        require(v.is_number_integer(), ErrorKind::config, key_path(key) + ": expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        require(v.is_number(), ErrorKind::config, key_path(key) + ": expected a number");
      }
      out = v.get<T>();
    } catch (const json::exception& e) {
      fail(ErrorKind::config, key_path(key) + ": " + e.what());
    }
    return true;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      require(seen_.count(it.key()) > 0, ErrorKind::config, "unknown key '" + key_path(it.key()) + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void check_range(bool ok, const std::string& key, const std::string& rule) {
  require(ok, ErrorKind::config, key + ": " + rule);
}

template <typename T>
void read_unit(ObjectReader& r, const std::string& key, T& out) {
  if (r.get(key, out)) check_range(out >= 0.0 && out <= 1.0, r.key_path(key), "must be in [0,1]");
}

template <typename T>
void read_positive(ObjectReader& r, const std::string& key, T& out) {
  if (r.get(key, out)) check_range(out > 0, r.key_path(key), "must be > 0");
}

template <typename T>
void read_nonneg(ObjectReader& r, const std::string& key, T& out) {
  if (r.get(key, out)) check_range(out >= 0, r.key_path(key), "must be >= 0");
}

/// Accepts `primary` or its alias, but not both.
inline void read_unit_alias(ObjectReader& r, const std::string& primary, const std::string& alias, double& out) {
  check_range(!(r.has(primary) && r.has(alias)), r.key_path(primary),
              "given together with its alias '" + alias + "'");
  read_unit(r, primary, out);
  read_unit(r, alias, out);
}

inline std::vector<double> read_number_list(ObjectReader& r, const std::string& key) {
  const auto& v = r.raw(key);
  std::vector<double> out;
  if (v.is_number()) {
    out.push_back(v.get<double>());
  } else {
    require(v.is_array() && !v.empty(), ErrorKind::config, r.key_path(key) + ": expected a nonempty array");
    for (const auto& e : v) {
      require(e.is_number(), ErrorKind::config, r.key_path(key) + ": expected numbers");
      out.push_back(e.get<double>());
    }
  }
  return out;
}

inline std::vector<int> read_int_list(ObjectReader& r, const std::string& key) {
  std::vector<int> out;
  for (double d : read_number_list(r, key)) {
    require(d == std::floor(d), ErrorKind::config, r.key_path(key) + ": expected integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

inline void read_qeesn(const json& obj, ModelConfig& cfg) {
  ObjectReader r(obj, "qeesn");
  auto& h = cfg.qeesn;
  read_positive(r, "n_h", h.reservoir.n_h);
  read_unit(r, "nu", h.reservoir.nu);
  read_unit_alias(r, "pi_w", "pi_nonzero_w", h.reservoir.pi_w);
  read_unit_alias(r, "pi_u", "pi_nonzero_u", h.reservoir.pi_u);
  read_positive(r, "a_w", h.reservoir.a_w);
  read_positive(r, "a_u", h.reservoir.a_u);
  read_nonneg(r, "m", h.embedding.m);
  read_positive(r, "tau", h.embedding.tau);
  read_nonneg(r, "r_v", h.r_v);
  read_positive(r, "lead", h.lead);
  read_nonneg(r, "burn_in", h.burn_in);
  r.get("add_noise", h.add_noise);
  if (r.get("level", h.level)) check_range(h.level > 0.0 && h.level < 1.0, "qeesn.level", "must be in (0,1)");
  if (r.has("cv_grid")) {
    ObjectReader g(r.raw("cv_grid"), "qeesn.cv_grid");
    if (g.has("n_h")) cfg.cv_grid.n_h = read_int_list(g, "n_h");
    if (g.has("nu")) cfg.cv_grid.nu = read_number_list(g, "nu");
    if (g.has("r_v")) cfg.cv_grid.r_v = read_number_list(g, "r_v");
    g.finish();
    for (int v : cfg.cv_grid.n_h) check_range(v >= 1, "qeesn.cv_grid.n_h", "entries must be >= 1");
    for (double v : cfg.cv_grid.nu) check_range(v >= 0.0 && v <= 1.0, "qeesn.cv_grid.nu", "entries must be in [0,1]");
    for (double v : cfg.cv_grid.r_v) check_range(v >= 0.0, "qeesn.cv_grid.r_v", "entries must be >= 0");
  }
  r.finish();
  h.validate();
}

inline void read_prior(const json& obj, DeepEsnConfig& d) {
  ObjectReader r(obj, "deesn.prior");
  auto expand = [&](const std::string& key, std::vector<double>& out) {
    if (!r.has(key)) return;
    auto v = read_number_list(r, key);
    if (v.size() == 1) v.assign(static_cast<std::size_t>(d.layers), v.front());
    check_range(static_cast<int>(v.size()) == d.layers, r.key_path(key), "needs one value per layer");
    out = v;
  };
  expand("sigma2_slab", d.prior.sigma2_slab);
  expand("sigma2_spike", d.prior.sigma2_spike);
  expand("pi", d.prior.pi);
  for (double v : d.prior.sigma2_spike) check_range(v > 0.0, "deesn.prior.sigma2_spike", "must be > 0");
  for (std::size_t l = 0; l < d.prior.sigma2_slab.size(); ++l)
    check_range(d.prior.sigma2_slab[l] >= d.prior.sigma2_spike[l], "deesn.prior.sigma2_slab",
                "must be >= sigma2_spike");
  for (double v : d.prior.pi) check_range(v >= 0.0 && v <= 1.0, "deesn.prior.pi", "must be in [0,1]");
  read_positive(r, "alpha_eta", d.prior.alpha_eta);
  read_positive(r, "beta_eta", d.prior.beta_eta);
  r.finish();
}

inline void read_ga(const json& obj, ModelConfig& cfg) {
  ObjectReader r(obj, "deesn.ga");
  read_positive(r, "budget", cfg.ga_budget);
  read_positive(r, "population", cfg.ga.population);
  read_positive(r, "max_generations", cfg.ga.max_generations);
  read_positive(r, "tournament", cfg.ga.tournament);
  read_unit(r, "crossover", cfg.ga.crossover);
  read_unit(r, "mutation", cfg.ga.mutation);
  read_nonneg(r, "elitism", cfg.ga.elitism);
  read_positive(r, "fitness_members", cfg.ga.fitness_members);
  auto& s = cfg.ga_space;
  read_unit(r, "nu_min", s.nu_min);
  read_unit(r, "nu_max", s.nu_max);
  read_positive(r, "reduced_min", s.reduced_min);
  read_positive(r, "reduced_max", s.reduced_max);
  read_positive(r, "n_h_1_min", s.n_h_1_min);
  read_positive(r, "n_h_1_max", s.n_h_1_max);
  read_positive(r, "r_v_min", s.r_v_min);
  read_positive(r, "r_v_max", s.r_v_max);
  read_nonneg(r, "m_min", s.m_min);
  read_nonneg(r, "m_max", s.m_max);
  r.finish();
  check_range(cfg.ga.elitism < cfg.ga.population, "deesn.ga.elitism", "must be < population");
  check_range(cfg.ga.population >= 2, "deesn.ga.population", "must be >= 2");
}

inline void read_deesn(const json& obj, ModelConfig& cfg) {
  ObjectReader r(obj, "deesn");
  auto& d = cfg.deesn;
  read_positive(r, "layers", d.layers);
  // per-layer defaults follow the depth unless given explicitly
  d.nu.assign(static_cast<std::size_t>(d.layers), 0.5);
  if (d.layers == 2) d.nu = {0.3, 0.9};
  d.reduced.assign(static_cast<std::size_t>(d.layers - 1), 8);
  d.prior = SsvsPrior::uniform(static_cast<std::size_t>(d.layers), 10.0, 0.001, 0.2);
  if (r.has("nu")) {
    auto v = read_number_list(r, "nu");
    if (v.size() == 1) v.assign(static_cast<std::size_t>(d.layers), v.front());
    check_range(static_cast<int>(v.size()) == d.layers, "deesn.nu", "needs one value per layer");
    for (double x : v) check_range(x >= 0.0 && x <= 1.0, "deesn.nu", "must be in [0,1]");
    d.nu = v;
  }
  read_positive(r, "n_h_1", d.n_h_1);
  read_positive(r, "n_h_deep", d.n_h_deep);
  if (r.has("reduced")) {
    auto v = read_int_list(r, "reduced");
    if (v.size() == 1 && d.layers > 2) v.assign(static_cast<std::size_t>(d.layers - 1), v.front());
    check_range(static_cast<int>(v.size()) == d.layers - 1, "deesn.reduced", "needs one width per layer 2..L");
    for (int x : v) check_range(x >= 1 && x <= d.n_h_deep, "deesn.reduced", "must be in [1, n_h_deep]");
    d.reduced = v;
  }
  read_unit_alias(r, "pi_w", "pi_nonzero_w", d.pi_w);
  read_unit_alias(r, "pi_u", "pi_nonzero_u", d.pi_u);
  read_positive(r, "a_w", d.a_w);
  read_positive(r, "a_u", d.a_u);
  read_nonneg(r, "m", d.embedding.m);
  read_positive(r, "tau", d.embedding.tau);
  read_nonneg(r, "r_v", d.r_v);
  read_positive(r, "lead", d.lead);
  read_nonneg(r, "burn_in", d.burn_in);
  read_positive(r, "n_basis", d.n_basis);
  if (r.get("level", d.level)) check_range(d.level > 0.0 && d.level < 1.0, "deesn.level", "must be in (0,1)");
  read_positive(r, "n_iter", d.n_iter);
  read_nonneg(r, "mcmc_burn", d.mcmc_burn);
  read_positive(r, "thin", d.thin);
  check_range(d.n_iter > d.mcmc_burn, "deesn.n_iter", "must exceed mcmc_burn");
  if (r.has("n_draws")) {
    std::int64_t n = 0;
    r.get("n_draws", n);
    check_range(n >= 1, "deesn.n_draws", "must be >= 1");
    cfg.n_draws = static_cast<std::size_t>(n);
  }
  if (r.has("prior")) read_prior(r.raw("prior"), d);
  if (r.has("ga")) read_ga(r.raw("ga"), cfg);
  r.finish();
  d.validate();
}

inline void read_kriging(const json& obj, ModelConfig& cfg) {
  ObjectReader r(obj, "kriging");
  auto& k = cfg.kriging;
  read_positive(r, "sigma2", k.covariance.sigma2);
  read_positive(r, "rho_s", k.covariance.rho_s);
  read_positive(r, "rho_t", k.covariance.rho_t);
  read_nonneg(r, "nugget", k.covariance.nugget);
  read_positive(r, "window", k.window);
  read_positive(r, "lead", k.lead);
  read_positive(r, "n_samples", k.n_samples);
  if (r.get("level", k.level)) check_range(k.level > 0.0 && k.level < 1.0, "kriging.level", "must be in (0,1)");
  r.finish();
}

inline void read_simulate(const json& obj, ModelConfig& cfg) {
  ObjectReader r(obj, "simulate");
  auto& s = cfg.simulate;
  read_positive(r, "T", s.steps);
  read_positive(r, "n_y", s.n_y);
  read_positive(r, "p", s.p);
  read_nonneg(r, "noise_sd", s.noise_sd);
  read_nonneg(r, "obs_sd", s.obs_sd);
  read_nonneg(r, "linear_radius", s.linear_radius);
  read_nonneg(r, "quad_scale", s.quad_scale);
  read_unit(r, "quad_density", s.quad_density);
  if (r.get("ar_coef", s.ar_coef))
    check_range(std::isfinite(s.ar_coef), "simulate.ar_coef", "must be finite");
  read_positive(r, "range", s.range);
  read_nonneg(r, "n_fast", s.n_fast);
  read_nonneg(r, "n_slow", s.n_slow);
  r.finish();
  check_range(s.n_fast + s.n_slow >= 1, "simulate.n_fast", "n_fast + n_slow must be >= 1");
}

inline void read_baseline(const json& obj, ModelConfig& cfg) {
  ObjectReader r(obj, "baseline");
  read_positive(r, "lead", cfg.baseline_lead);
  r.finish();
}

}  // namespace detail

inline ModelConfig parse_config(const json& doc) {
  detail::ObjectReader r(doc, "");
  ModelConfig cfg;
  std::string model = "qeesn";
  if (r.has("model")) {
    const auto& v = r.raw("model");
    require(v.is_string(), ErrorKind::config, "model: expected a string");
    model = v.get<std::string>();
  }
  if (model == "qeesn") cfg.model = ModelKind::qeesn;
  else if (model == "deesn") cfg.model = ModelKind::deesn;
  else if (model == "kriging") cfg.model = ModelKind::kriging;
  else if (model == "persistence") cfg.model = ModelKind::persistence;
  else if (model == "climatology") cfg.model = ModelKind::climatology;
  else fail(ErrorKind::config, "model: unknown model kind '" + model + "'");

  cfg.n_res = cfg.model == ModelKind::qeesn ? 100 : cfg.model == ModelKind::deesn ? 5 : 1;
  if (r.has("seed")) {
    const auto& v = r.raw("seed");
    require(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0), ErrorKind::config,
            "seed: must be a nonnegative integer");
    cfg.seed = v.get<std::uint64_t>();
  }
  detail::read_positive(r, "n_res", cfg.n_res);

  int nested = 0;
  for (const char* key : {"qeesn", "deesn", "kriging", "simulate", "baseline"}) nested += r.has(key) ? 1 : 0;
  require(nested <= 1, ErrorKind::config, "config: at most one nested model/simulate object is allowed");
  if (r.has("qeesn")) detail::read_qeesn(r.raw("qeesn"), cfg);
  if (r.has("deesn")) detail::read_deesn(r.raw("deesn"), cfg);
  if (r.has("kriging")) detail::read_kriging(r.raw("kriging"), cfg);
  if (r.has("simulate")) detail::read_simulate(r.raw("simulate"), cfg);
  if (r.has("baseline")) detail::read_baseline(r.raw("baseline"), cfg);
  r.finish();
  cfg.kriging.base_seed = cfg.seed;
  return cfg;
}

inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, what + ": invalid JSON: " + e.what());
  }
}

inline ModelConfig load_config(const std::filesystem::path& path) {
  return parse_config(parse_json_text(read_text_file(path), path.string()));
}

/// Serializes the model-relevant part of a config in the load_config schema.
inline json config_to_json(const ModelConfig& cfg) {
  json j;
  j["model"] = to_string(cfg.model);
  j["seed"] = cfg.seed;
  j["n_res"] = cfg.n_res;
  switch (cfg.model) {
    case ModelKind::qeesn: {
      const auto& h = cfg.qeesn;
      j["qeesn"] = {{"n_h", h.reservoir.n_h},     {"nu", h.reservoir.nu},   {"pi_w", h.reservoir.pi_w},
                    {"pi_u", h.reservoir.pi_u},   {"a_w", h.reservoir.a_w}, {"a_u", h.reservoir.a_u},
                    {"m", h.embedding.m},         {"tau", h.embedding.tau}, {"r_v", h.r_v},
                    {"lead", h.lead},             {"burn_in", h.burn_in},   {"add_noise", h.add_noise},
                    {"level", h.level}};
      break;
    }
    case ModelKind::deesn: {
      const auto& d = cfg.deesn;
      json dj = {{"layers", d.layers},     {"nu", d.nu},           {"n_h_1", d.n_h_1},
                 {"n_h_deep", d.n_h_deep}, {"reduced", d.reduced}, {"pi_w", d.pi_w},
                 {"pi_u", d.pi_u},         {"a_w", d.a_w},         {"a_u", d.a_u},
                 {"m", d.embedding.m},     {"tau", d.embedding.tau}, {"r_v", d.r_v},
                 {"lead", d.lead},         {"burn_in", d.burn_in}, {"n_basis", d.n_basis},
                 {"level", d.level},       {"n_iter", d.n_iter},   {"mcmc_burn", d.mcmc_burn},
                 {"thin", d.thin}};
      if (d.reduced.empty()) dj.erase("reduced");
      if (cfg.n_draws) dj["n_draws"] = *cfg.n_draws;
      dj["prior"] = {{"sigma2_slab", d.prior.sigma2_slab},
                     {"sigma2_spike", d.prior.sigma2_spike},
                     {"pi", d.prior.pi},
                     {"alpha_eta", d.prior.alpha_eta},
                     {"beta_eta", d.prior.beta_eta}};
      j["deesn"] = dj;
      break;
    }
    case ModelKind::kriging: {
      const auto& k = cfg.kriging;
      j["kriging"] = {{"sigma2", k.covariance.sigma2}, {"rho_s", k.covariance.rho_s},
                      {"rho_t", k.covariance.rho_t},   {"nugget", k.covariance.nugget},
                      {"window", k.window},            {"lead", k.lead},
                      {"n_samples", k.n_samples},      {"level", k.level}};
      break;
    }
    default:
      j["baseline"] = {{"lead", cfg.baseline_lead}};
  }
  return j;
}

}  // namespace rcast
