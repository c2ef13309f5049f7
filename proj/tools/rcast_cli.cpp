// rcast: simulate / train / forecast / evaluate / tune

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include "rcast/rcast.hpp"

namespace fs = std::filesystem;
using namespace rcast;

namespace {

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return 2;
    case ErrorKind::blow_up: return 3;
    case ErrorKind::format:
    case ErrorKind::io:
    case ErrorKind::dimension:
    case ErrorKind::insufficient_history: return 4;
    case ErrorKind::domain:
    case ErrorKind::singular:
    case ErrorKind::degenerate_reservoir: return 5;
  }
  return 1;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

RunManifest start_manifest(const std::string& command, const std::vector<std::string>& args) {
  RunManifest m;
  m.command = command;
  m.arguments = args;
  return m;
}

void finish_manifest(RunManifest& m, const Stopwatch& clock, const fs::path& dir) {
  m.wall_time_seconds = clock.seconds();
  m.write(dir / "manifest.json");
}

fs::path default_locations(const fs::path& data, const std::string& given) {
  if (!given.empty()) return given;
  return data.parent_path() / "locations.csv";
}

// ---------------------------------------------------------------------------
// simulate

json simulate_json(const std::string& model, const SimulateConfig& s, std::uint64_t seed) {
  json j = {{"model", model}, {"seed", seed}, {"T", s.steps}, {"n_y", s.n_y}, {"obs_sd", s.obs_sd}};
  if (model == "gqn") {
    j["p"] = s.p;
    j["noise_sd"] = s.noise_sd;
    j["linear_radius"] = s.linear_radius;
    j["quad_scale"] = s.quad_scale;
    j["quad_density"] = s.quad_density;
  } else if (model == "linear") {
    j["noise_sd"] = s.noise_sd;
    j["ar_coef"] = s.ar_coef;
    j["range"] = s.range;
  } else {
    j["n_fast"] = s.n_fast;
    j["n_slow"] = s.n_slow;
  }
  return j;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

int cmd_simulate(const std::string& model, const std::string& config_path, const std::string& out,
                 std::optional<std::uint64_t> seed_flag, const std::vector<std::string>& args) {
  Stopwatch clock;
  ModelConfig cfg;
  if (!config_path.empty()) cfg = load_config(config_path);
  const std::uint64_t seed = seed_flag ? *seed_flag : cfg.seed;
  const auto& s = cfg.simulate;
  const RngStream base{seed, stream_ids::simulate};

  json truth = {{"generator", simulate_json(model, s, seed)}};
  Matrix values;
  if (model == "gqn") {
    const auto params = default_gqn_params(s.p, s.n_y, base.substream(1), s.linear_radius, s.quad_scale,
                                           s.quad_density, s.noise_sd);
    auto sim = simulate_gqn(params, s.steps, Vector::Zero(s.p), base.substream(2));
    values = sim.field.values();
    json q = json::array();
    for (const auto& slice : params.theta_q) q.push_back(matrix_json(slice));
    truth["theta_l"] = matrix_json(params.theta_l);
    truth["theta_q"] = q;
    truth["phi_out"] = matrix_json(params.phi_out);
  } else if (model == "linear") {
    const auto locs = grid_locations(s.n_y);
    LinearDstmParams lp;
    lp.m = s.ar_coef * Matrix::Identity(s.n_y, s.n_y);
    lp.c_eta.resize(s.n_y, s.n_y);
    for (int i = 0; i < s.n_y; ++i)
      for (int j = 0; j < s.n_y; ++j)
        lp.c_eta(i, j) = s.noise_sd * s.noise_sd *
                         std::exp(-std::hypot(locs[i].x - locs[j].x, locs[i].y - locs[j].y) / s.range);
    values = simulate_linear_dstm(lp, s.steps, Vector::Zero(s.n_y), base.substream(1)).values();
    truth["M"] = matrix_json(lp.m);
    truth["C_eta"] = matrix_json(lp.c_eta);
  } else if (model == "multiscale") {
    auto data = multiscale_benchmark(seed, s.n_y, s.steps, s.n_fast, s.n_slow, s.obs_sd);
    values = data.field.values();
  } else {
    fail(ErrorKind::config, "simulate: unknown model '" + model + "'");
  }
  if (model != "multiscale") add_observation_noise(values, s.obs_sd, base.substream(3));
  const auto field = field_on_grid(std::move(values));

  fs::create_directories(out);
  write_field_csv(field, fs::path(out) / "data.csv");
  write_locations_csv(field.locations(), fs::path(out) / "locations.csv");
  write_file_atomic(fs::path(out) / "truth.json", dump_json(truth));

  auto m = start_manifest("simulate", args);
  m.config_hash = hex64(fnv1a(truth.at("generator").dump()));
  m.base_seed = seed;
  if (!config_path.empty()) m.add_file("config", config_path);
  m.add_file("data.csv", fs::path(out) / "data.csv");
  m.add_file("truth.json", fs::path(out) / "truth.json");
  finish_manifest(m, clock, out);
  return 0;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const std::string& config_path, const std::string& data, const std::string& locations,
              const std::string& out, const std::string& ga_trace, const std::vector<std::string>& args) {
  Stopwatch clock;
  const ModelConfig cfg = load_config(config_path);
  const auto z = read_field_csv(data, default_locations(data, locations));
  fs::create_directories(out);
  const fs::path dir(out);

  switch (cfg.model) {
    case ModelKind::qeesn: {
      const auto ens = fit_ensemble(z, z.values(), cfg.qeesn, cfg.n_res, cfg.seed);
      save_qeesn(ens, cfg, dir);
      break;
    }
    case ModelKind::deesn: {
      const auto model = fit_deesn(z, z.values(), cfg.deesn, cfg.n_res, cfg.seed);
      json trace = json::array();
      if (!ga_trace.empty()) trace = parse_json_text(read_text_file(ga_trace), ga_trace);
      save_deesn(model, cfg, dir, trace);
      break;
    }
    default: {
      // baselines keep their settings and the training climatology
      json j;
      j["format"] = "rcast-baseline/1";
      j["config"] = config_to_json(cfg);
      j["data_fingerprint"] = hex64(fingerprint(z));
      j["climatology"] = vector_json(climatology_forecast(z.values(), 1).row(0).transpose());
      write_file_atomic(dir / "model.json", dump_json(j));
    }
  }

  auto m = start_manifest("train", args);
  m.config_hash = config_hash(cfg);
  m.base_seed = cfg.seed;
  m.add_file("config", config_path);
  m.add_file("data", data);
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name != "manifest.json" && entry.is_regular_file()) m.add_file(name, entry.path());
  }
  finish_manifest(m, clock, dir);
  return 0;
}

// ---------------------------------------------------------------------------
// forecast

struct LoadedModel {
  ModelConfig cfg;
  std::optional<QeesnEnsemble> qeesn;
  std::optional<DeesnModel> deesn;
  Vector climatology;
};

LoadedModel load_model(const fs::path& dir) {
  LoadedModel lm;
  if (fs::exists(dir / "deesn.json")) {
    lm.deesn = load_deesn(dir, &lm.cfg);
    return lm;
  }
  const std::string text = read_text_file(dir / "model.json");
  const json j = parse_json_text(text, (dir / "model.json").string());
  const std::string format = j.value("format", "");
  if (format == "rcast-qeesn/1") {
    lm.qeesn = load_qeesn(dir, &lm.cfg);
  } else if (format == "rcast-baseline/1") {
    parse_model_json(dir / "model.json", [&](const json& doc) {
      lm.cfg = parse_config(doc.at("config"));
      lm.climatology = json_vector(doc.at("climatology"));
      return 0;
    });
  } else {
    fail(ErrorKind::format, (dir / "model.json").string() + ": unknown model format '" + format + "'");
  }
  return lm;
}

EnsembleForecast point_forecast(Matrix mean, const FieldSeries& z, int lead) {
  EnsembleForecast fc;
  fc.lead = lead;
  for (Eigen::Index h = 0; h < mean.rows(); ++h) fc.origin_rows.push_back(z.n_times() - mean.rows() + h);
  fc.member_values.push_back(std::move(mean));
  summarize(fc);
  return fc;
}

EnsembleForecast run_forecast(const LoadedModel& lm, const FieldSeries& z, int horizon) {
  if (lm.qeesn) {
    require(z.n_locations() == lm.qeesn->n_y(), ErrorKind::dimension,
            "forecast: data has " + std::to_string(z.n_locations()) + " locations, model expects " +
                std::to_string(lm.qeesn->n_y()));
    return forecast(*lm.qeesn, z.values(), horizon);
  }
  if (lm.deesn) {
    require(z.n_locations() == lm.deesn->n_y(), ErrorKind::dimension,
            "forecast: data has " + std::to_string(z.n_locations()) + " locations, model expects " +
                std::to_string(lm.deesn->n_y()));
    return forecast_deesn(*lm.deesn, z.values(), horizon, lm.cfg.n_draws);
  }
  switch (lm.cfg.model) {
    case ModelKind::kriging: return lm.cfg.kriging.forecast(z, horizon);
    case ModelKind::persistence:
      return point_forecast(persistence_forecast(z.values(), horizon), z, lm.cfg.baseline_lead);
    default: {
      require(z.n_locations() == lm.climatology.size(), ErrorKind::dimension,
              "forecast: data has the wrong number of locations");
      Matrix mean = lm.climatology.transpose().replicate(horizon, 1);
      return point_forecast(std::move(mean), z, lm.cfg.baseline_lead);
    }
  }
}

int cmd_forecast(const std::string& model_dir, const std::string& data, const std::string& locations, int horizon,
                 const std::string& out, const std::vector<std::string>& args) {
  Stopwatch clock;
  require(horizon >= 1, ErrorKind::config, "forecast: --horizon must be >= 1");
  const LoadedModel lm = load_model(model_dir);
  const auto z = read_field_csv(data, default_locations(data, locations));
  const auto fc = run_forecast(lm, z, horizon);

  std::string members = "time,loc,member,value\n";
  std::string summary = "time,loc,mean,q025,q975\n";
  for (Eigen::Index h = 0; h < fc.horizon(); ++h) {
    const auto t = z.times()[static_cast<std::size_t>(fc.origin_rows[h])] + fc.lead * z.time_step();
    const std::string ts = std::to_string(t);
    for (Eigen::Index i = 0; i < fc.mean.cols(); ++i) {
      const std::string loc = std::to_string(z.locations()[i].id);
      for (std::size_t j = 0; j < fc.member_values.size(); ++j)
        members += ts + "," + loc + "," + std::to_string(j) + "," + format_double(fc.member_values[j](h, i)) + "\n";
      summary += ts + "," + loc + "," + format_double(fc.mean(h, i)) + "," + format_double(fc.lower(h, i)) + "," +
                 format_double(fc.upper(h, i)) + "\n";
    }
  }
  fs::create_directories(out);
  write_file_atomic(fs::path(out) / "members.csv", members);
  write_file_atomic(fs::path(out) / "summary.csv", summary);

  auto m = start_manifest("forecast", args);
  m.config_hash = config_hash(lm.cfg);
  m.base_seed = lm.cfg.seed;
  m.add_file("data", data);
  for (const auto& entry : fs::directory_iterator(model_dir))
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
      m.add_file("model/" + entry.path().filename().string(), entry.path());
  m.add_file("members.csv", fs::path(out) / "members.csv");
  m.add_file("summary.csv", fs::path(out) / "summary.csv");
  finish_manifest(m, clock, out);
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct ForecastTable {
  std::vector<std::int64_t> times;
  std::vector<std::int64_t> locs;
  std::vector<Matrix> members;
  Matrix mean, lower, upper;
};

ForecastTable read_forecast_dir(const fs::path& dir) {
  std::map<std::pair<std::int64_t, std::int64_t>, std::array<double, 3>> summary;
  std::set<std::int64_t> times, locs;
  const auto spath = dir / "summary.csv";
  detail::for_each_data_row(read_text_file(spath), "time,loc,mean,q025,q975", spath.string(),
                            [&](const auto& f, const std::string& where) {
                              require(f.size() == 5, ErrorKind::format, where + ": expected 5 fields");
                              const auto t = parse_number<std::int64_t>(f[0], where);
                              const auto l = parse_number<std::int64_t>(f[1], where);
                              times.insert(t);
                              locs.insert(l);
                              require(summary
                                          .emplace(std::make_pair(t, l),
                                                   std::array<double, 3>{parse_number<double>(f[2], where),
                                                                         parse_number<double>(f[3], where),
                                                                         parse_number<double>(f[4], where)})
                                          .second,
                                      ErrorKind::format, where + ": duplicate (time, loc)");
                            });
  require(!summary.empty(), ErrorKind::format, spath.string() + ": no rows");
  ForecastTable ft;
  ft.times.assign(times.begin(), times.end());
  ft.locs.assign(locs.begin(), locs.end());
  std::map<std::int64_t, Eigen::Index> trow, lcol;
  for (std::size_t i = 0; i < ft.times.size(); ++i) trow[ft.times[i]] = static_cast<Eigen::Index>(i);
  for (std::size_t i = 0; i < ft.locs.size(); ++i) lcol[ft.locs[i]] = static_cast<Eigen::Index>(i);
  const auto h = static_cast<Eigen::Index>(ft.times.size()), n = static_cast<Eigen::Index>(ft.locs.size());
  require(static_cast<Eigen::Index>(summary.size()) == h * n, ErrorKind::format,
          spath.string() + ": summary does not cover every (time, loc) pair");
  ft.mean.resize(h, n);
  ft.lower.resize(h, n);
  ft.upper.resize(h, n);
  for (const auto& [key, v] : summary) {
    const auto r = trow[key.first], c = lcol[key.second];
    ft.mean(r, c) = v[0];
    ft.lower(r, c) = v[1];
    ft.upper(r, c) = v[2];
  }

  const auto mpath = dir / "members.csv";
  std::map<std::int64_t, Matrix> by_member;
  std::map<std::int64_t, Eigen::Index> filled;
  detail::for_each_data_row(read_text_file(mpath), "time,loc,member,value", mpath.string(),
                            [&](const auto& f, const std::string& where) {
                              require(f.size() == 4, ErrorKind::format, where + ": expected 4 fields");
                              const auto t = parse_number<std::int64_t>(f[0], where);
                              const auto l = parse_number<std::int64_t>(f[1], where);
                              const auto j = parse_number<std::int64_t>(f[2], where);
                              require(trow.count(t) && lcol.count(l), ErrorKind::format,
                                      where + ": (time, loc) not in summary.csv");
                              auto [it, fresh] = by_member.try_emplace(j, Matrix::Constant(h, n, std::nan("")));
                              it->second(trow[t], lcol[l]) = parse_number<double>(f[3], where);
                              ++filled[j];
                            });
  require(!by_member.empty(), ErrorKind::format, mpath.string() + ": no rows");
  for (auto& [j, mat] : by_member) {
    require(filled[j] == h * n && mat.allFinite(), ErrorKind::format,
            mpath.string() + ": member " + std::to_string(j) + " does not cover every (time, loc) pair");
    ft.members.push_back(std::move(mat));
  }
  return ft;
}

Matrix truth_matrix(const fs::path& path, const ForecastTable& ft) {
  std::map<std::pair<std::int64_t, std::int64_t>, double> cells;
  detail::for_each_data_row(read_text_file(path), "time,loc,value", path.string(),
                            [&](const auto& f, const std::string& where) {
                              require(f.size() == 3, ErrorKind::format, where + ": expected 3 fields");
                              cells[{parse_number<std::int64_t>(f[0], where), parse_number<std::int64_t>(f[1], where)}] =
                                  parse_number<double>(f[2], where);
                            });
  Matrix truth(static_cast<Eigen::Index>(ft.times.size()), static_cast<Eigen::Index>(ft.locs.size()));
  for (std::size_t r = 0; r < ft.times.size(); ++r)
    for (std::size_t c = 0; c < ft.locs.size(); ++c) {
      const auto it = cells.find({ft.times[r], ft.locs[c]});
      require(it != cells.end(), ErrorKind::format,
              path.string() + ": no truth for time " + std::to_string(ft.times[r]) + ", loc " +
                  std::to_string(ft.locs[c]));
      truth(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = it->second;
    }
  return truth;
}

json report_json(const ScoreReport& r) {
  return {{"mspe", r.mspe},
          {"crps_mean", r.crps_mean},
          {"coverage", r.coverage},
          {"mspe_by_location", vector_json(r.mspe_by_location)},
          {"crps_by_location", vector_json(r.crps_by_location)},
          {"coverage_by_location", vector_json(r.coverage_by_location)}};
}

int cmd_evaluate(const std::string& forecast_dir, const std::string& truth_path, const std::string& reference,
                 const std::string& out, const std::vector<std::string>& args) {
  Stopwatch clock;
  const auto ft = read_forecast_dir(forecast_dir);
  const Matrix truth = truth_matrix(truth_path, ft);
  const auto r = score_forecast(ft.members, ft.mean, ft.lower, ft.upper, truth);
  json scores = report_json(r);
  scores["n_times"] = ft.times.size();
  scores["n_locations"] = ft.locs.size();
  scores["n_members"] = ft.members.size();
  if (!reference.empty()) {
    const auto ref = read_forecast_dir(reference);
    require(ref.times == ft.times && ref.locs == ft.locs, ErrorKind::format,
            "evaluate: reference forecast covers different (time, loc) pairs");
    const auto rr = score_forecast(ref.members, ref.mean, ref.lower, ref.upper, truth);
    scores["reference"] = report_json(rr);
    // skill = 1 - score / reference score (undefined when the reference is perfect)
    auto skill = [](double s, double ref_s) { return ref_s > 0.0 ? json(1.0 - s / ref_s) : json(nullptr); };
    scores["skill"] = {{"mspe", skill(r.mspe, rr.mspe)}, {"crps", skill(r.crps_mean, rr.crps_mean)}};
  }

  std::string by_lead = "step,time,mspe,crps,coverage\n";
  for (std::size_t h = 0; h < ft.times.size(); ++h) {
    const auto i = static_cast<Eigen::Index>(h);
    by_lead += std::to_string(h + 1) + "," + std::to_string(ft.times[h]) + "," + format_double(r.mspe_by_row(i)) +
               "," + format_double(r.crps_by_row(i)) + "," + format_double(r.coverage_by_row(i)) + "\n";
  }
  fs::create_directories(out);
  write_file_atomic(fs::path(out) / "scores.json", dump_json(scores));
  write_file_atomic(fs::path(out) / "scores_by_lead.csv", by_lead);

  auto m = start_manifest("evaluate", args);
  m.add_file("forecast/members.csv", fs::path(forecast_dir) / "members.csv");
  m.add_file("forecast/summary.csv", fs::path(forecast_dir) / "summary.csv");
  m.add_file("truth", truth_path);
  m.add_file("scores.json", fs::path(out) / "scores.json");
  finish_manifest(m, clock, out);
  return 0;
}

// ---------------------------------------------------------------------------
// tune

int cmd_tune(const std::string& config_path, const std::string& data, const std::string& locations,
             const std::string& method, const std::string& out, const std::vector<std::string>& args) {
  Stopwatch clock;
  ModelConfig cfg = load_config(config_path);
  const auto z = read_field_csv(data, default_locations(data, locations));
  fs::create_directories(out);
  const fs::path dir(out);

  if (method == "cv") {
    require(cfg.model == ModelKind::qeesn, ErrorKind::config, "tune --method cv needs a qeesn config");
    const auto cv = cross_validate(z, z.values(), cfg.cv_grid, cfg.qeesn, cfg.n_res, cfg.seed);
    cfg.qeesn = cv.best;
    std::string table = "n_h,nu,r_v,mspe\n";
    for (const auto& p : cv.table)
      table += std::to_string(p.n_h) + "," + format_double(p.nu) + "," + format_double(p.r_v) + "," +
               format_double(p.mspe) + "\n";
    write_file_atomic(dir / "cv_table.csv", table);
  } else if (method == "ga") {
    require(cfg.model == ModelKind::deesn, ErrorKind::config, "tune --method ga needs a deesn config");
    const auto ga = ga_tune(z, z.values(), cfg.deesn, cfg.ga_space, cfg.ga_budget, cfg.seed, cfg.ga);
    cfg.deesn = ga.best;
    json trace = json::array();
    for (const auto& g : ga.trace)
      trace.push_back({{"generation", g.generation},
                       {"best", g.best},
                       {"best_so_far", g.best_so_far},
                       {"mean", std::isfinite(g.mean) ? json(g.mean) : json(nullptr)}});
    write_file_atomic(dir / "ga_trace.json",
                      dump_json({{"evaluations", ga.evaluations}, {"best_fitness", ga.best_fitness}, {"trace", trace}}));
  } else {
    fail(ErrorKind::config, "tune: unknown method '" + method + "'");
  }
  write_file_atomic(dir / "config.json", dump_json(config_to_json(cfg)));

  auto m = start_manifest("tune", args);
  m.config_hash = config_hash(cfg);
  m.base_seed = cfg.seed;
  m.add_file("config", config_path);
  m.add_file("data", data);
  m.add_file("config.json", dir / "config.json");
  finish_manifest(m, clock, dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reservoir-computing spatio-temporal forecasts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  std::vector<std::string> args(argv + 1, argv + argc);

  std::string sim_model = "gqn", config, out, data, locations, model_dir, forecast_dir, truth, reference, method,
              ga_trace;
  std::optional<std::uint64_t> seed;
  int horizon = 1;

  auto* sim = app.add_subcommand("simulate", "write a synthetic field");
  sim->add_option("--model", sim_model, "gqn | linear | multiscale")
      ->check(CLI::IsMember({"gqn", "linear", "multiscale"}));
  sim->add_option("--config", config, "JSON config with a simulate block");
  sim->add_option("--out", out, "output directory")->required();
  sim->add_option("--seed", seed, "overrides the config seed");

  auto* train = app.add_subcommand("train", "fit a model");
  train->add_option("--config", config)->required();
  train->add_option("--data", data)->required();
  train->add_option("--locations", locations, "defaults to locations.csv next to --data");
  train->add_option("--out", out, "model directory")->required();
  train->add_option("--ga-trace", ga_trace, "ga_trace.json from tune, stored with a deesn model");

  auto* fc = app.add_subcommand("forecast", "forecast from the end of a history");
  fc->add_option("--model", model_dir)->required();
  fc->add_option("--data", data)->required();
  fc->add_option("--locations", locations, "defaults to locations.csv next to --data");
  fc->add_option("--horizon", horizon, "number of forecast origins");
  fc->add_option("--out", out, "output directory")->required();

  auto* ev = app.add_subcommand("evaluate", "score a forecast");
  ev->add_option("--forecast", forecast_dir, "forecast output directory")->required();
  ev->add_option("--truth", truth, "observations CSV")->required();
  ev->add_option("--reference", reference, "baseline forecast directory for skill ratios");
  ev->add_option("--out", out, "output directory")->required();

  auto* tune = app.add_subcommand("tune", "select hyperparameters");
  tune->add_option("--config", config)->required();
  tune->add_option("--data", data)->required();
  tune->add_option("--locations", locations, "defaults to locations.csv next to --data");
  tune->add_option("--method", method, "cv | ga")->required()->check(CLI::IsMember({"cv", "ga"}));
  tune->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(sim_model, config, out, seed, args);
    if (*train) return cmd_train(config, data, locations, out, ga_trace, args);
    if (*fc) return cmd_forecast(model_dir, data, locations, horizon, out, args);
    if (*ev) return cmd_evaluate(forecast_dir, truth, reference, out, args);
    if (*tune) return cmd_tune(config, data, locations, method, out, args);
  } catch (const Error& e) {
    std::cerr << "rcast: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "rcast: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "rcast: internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
