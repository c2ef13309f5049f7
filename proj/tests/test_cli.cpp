#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rcast/field.hpp"
#include "rcast/model_io.hpp"
#include "support.hpp"

using namespace rcast;
namespace fs = std::filesystem;
namespace ts = testing_support;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + RCAST_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

std::size_t line_count(const fs::path& p) {
  const auto text = read_text_file(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// first `rows` time steps of a simulated data.csv
fs::path head_rows(const fs::path& data, int n_y, int rows, const fs::path& out) {
  std::istringstream in(read_text_file(data));
  std::string line, text;
  for (int i = 0; i < 1 + n_y * rows && std::getline(in, line); ++i) text += line + "\n";
  write(out, text);
  return out;
}

struct Sim {
  fs::path dir;
  fs::path data;
  fs::path history;
};

// 12 locations x 200 steps, history = first 190 steps
Sim small_sim(const std::string& name) {
  Sim s;
  s.dir = ts::scratch_dir(name);
  write(s.dir / "sim.json", R"({"model":"qeesn","simulate":{"T":200,"n_y":12,"p":3}})");
  EXPECT_EQ(run("simulate --model gqn --config " + q(s.dir / "sim.json") + " --seed 8 --out " + q(s.dir / "sim")), 0);
  s.data = s.dir / "sim" / "data.csv";
  fs::copy_file(s.dir / "sim" / "locations.csv", s.dir / "locations.csv");
  s.history = head_rows(s.data, 12, 190, s.dir / "history.csv");
  return s;
}

}  // namespace

TEST(CliSimulate, WritesFilesAndIsReproducible) {
  const auto dir = ts::scratch_dir("cli_sim");
  const std::string base = "simulate --model linear --seed 4 --config " + q(dir / "c.json") + " --out ";
  write(dir / "c.json", R"({"model":"qeesn","simulate":{"T":40,"n_y":9}})");
  ASSERT_EQ(run(base + q(dir / "a")), 0);
  ASSERT_EQ(run(base + q(dir / "b")), 0);
  EXPECT_EQ(line_count(dir / "a" / "data.csv"), 1u + 40u * 9u);
  EXPECT_EQ(line_count(dir / "a" / "locations.csv"), 1u + 9u);
  EXPECT_TRUE(fs::exists(dir / "a" / "truth.json"));
  EXPECT_TRUE(fs::exists(dir / "a" / "manifest.json"));
  EXPECT_EQ(read_text_file(dir / "a" / "data.csv"), read_text_file(dir / "b" / "data.csv"));
  EXPECT_EQ(read_text_file(dir / "a" / "truth.json"), read_text_file(dir / "b" / "truth.json"));
  // the CSV reads back as a field
  const auto z = read_field_csv(dir / "a" / "data.csv", dir / "a" / "locations.csv");
  EXPECT_EQ(z.n_times(), 40);
  EXPECT_EQ(z.n_locations(), 9);
}

TEST(CliSimulate, BlowUpExitsThree) {
  const auto dir = ts::scratch_dir("cli_blow");
  write(dir / "c.json", R"({"model":"qeesn","simulate":{"linear_radius":3.0,"quad_scale":2.0}})");
  EXPECT_EQ(run("simulate --model gqn --config " + q(dir / "c.json") + " --out " + q(dir / "o")), 3);
}

TEST(CliArguments, BadInputsMapToExitCodes) {
  const auto dir = ts::scratch_dir("cli_args");
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("simulate --model nope --out " + q(dir / "o")), 2);
  write(dir / "bad.json", R"({"model":"qeesn","bogus":1})");
  write(dir / "data.csv", "time,loc,value\n0,0,1\n");
  write(dir / "locations.csv", "loc,x,y\n0,0,0\n");
  EXPECT_EQ(run("train --config " + q(dir / "bad.json") + " --data " + q(dir / "data.csv") + " --out " +
                q(dir / "m")),
            2);
  write(dir / "ok.json", R"({"model":"qeesn","qeesn":{"n_h":5}})");
  write(dir / "broken.csv", "time,loc,value\n0,0,abc\n");
  EXPECT_EQ(run("train --config " + q(dir / "ok.json") + " --data " + q(dir / "broken.csv") + " --locations " +
                q(dir / "locations.csv") + " --out " + q(dir / "m")),
            4);
  // one time step cannot support an embedding
  EXPECT_EQ(run("train --config " + q(dir / "ok.json") + " --data " + q(dir / "data.csv") + " --out " +
                q(dir / "m")),
            4);
}

TEST(CliPipeline, QeesnTrainForecastEvaluate) {
  const auto s = small_sim("cli_q");
  write(s.dir / "q.json", R"({"model":"qeesn","seed":3,"n_res":1,"qeesn":{"n_h":15,"burn_in":10}})");
  ASSERT_EQ(run("train --config " + q(s.dir / "q.json") + " --data " + q(s.history) + " --out " + q(s.dir / "m")), 0);
  EXPECT_TRUE(fs::exists(s.dir / "m" / "members.bin"));
  EXPECT_TRUE(fs::exists(s.dir / "m" / "model.json"));

  const std::string fc = "forecast --model " + q(s.dir / "m") + " --data " + q(s.history) + " --horizon 1 --out ";
  ASSERT_EQ(run(fc + q(s.dir / "f")), 0);
  ASSERT_EQ(run(fc + q(s.dir / "f2")), 0);
  EXPECT_EQ(read_text_file(s.dir / "f" / "members.csv"), read_text_file(s.dir / "f2" / "members.csv"));
  EXPECT_EQ(line_count(s.dir / "f" / "members.csv"), 1u + 12u);

  // a single member forecast: the mean is that member's value
  std::istringstream members(read_text_file(s.dir / "f" / "members.csv"));
  std::istringstream summary(read_text_file(s.dir / "f" / "summary.csv"));
  std::string m_line, s_line;
  std::getline(members, m_line);
  std::getline(summary, s_line);
  while (std::getline(members, m_line) && std::getline(summary, s_line)) {
    const auto mf = split_csv_line(m_line), sf = split_csv_line(s_line);
    EXPECT_EQ(mf[0], sf[0]);
    EXPECT_EQ(mf[0], "190");
    EXPECT_EQ(mf[1], sf[1]);
    EXPECT_EQ(std::stod(std::string(mf[3])), std::stod(std::string(sf[2])));
    EXPECT_LE(std::stod(std::string(sf[3])), std::stod(std::string(sf[4])));
  }

  ASSERT_EQ(run("evaluate --forecast " + q(s.dir / "f") + " --truth " + q(s.data) + " --out " + q(s.dir / "e")), 0);
  const auto scores = parse_json_text(read_text_file(s.dir / "e" / "scores.json"), "scores");
  EXPECT_GE(scores.at("mspe").get<double>(), 0.0);
  EXPECT_EQ(line_count(s.dir / "e" / "scores_by_lead.csv"), 2u);

  // forecasting past the end of the truth file is a data error
  EXPECT_EQ(run("forecast --model " + q(s.dir / "m") + " --data " + q(s.data) + " --horizon 1 --out " +
                q(s.dir / "g")),
            0);
  EXPECT_EQ(run("evaluate --forecast " + q(s.dir / "g") + " --truth " + q(s.data) + " --out " + q(s.dir / "e2")), 4);
  EXPECT_EQ(run("forecast --model " + q(s.dir / "m") + " --data " + q(s.history) + " --horizon 500 --out " +
                q(s.dir / "h")),
            4);
}

TEST(CliEvaluate, PerfectForecastScoresZero) {
  const auto dir = ts::scratch_dir("cli_perfect");
  fs::create_directories(dir / "f");
  write(dir / "f" / "members.csv", "time,loc,member,value\n5,0,0,1.5\n5,0,1,1.5\n5,1,0,-2\n5,1,1,-2\n");
  write(dir / "f" / "summary.csv", "time,loc,mean,q025,q975\n5,0,1.5,1.5,1.5\n5,1,-2,-2,-2\n");
  write(dir / "truth.csv", "time,loc,value\n4,0,9\n5,0,1.5\n5,1,-2\n");
  ASSERT_EQ(run("evaluate --forecast " + q(dir / "f") + " --truth " + q(dir / "truth.csv") + " --out " +
                q(dir / "e") + " --reference " + q(dir / "f")),
            0);
  const auto scores = parse_json_text(read_text_file(dir / "e" / "scores.json"), "scores");
  EXPECT_EQ(scores.at("mspe").get<double>(), 0.0);
  EXPECT_EQ(scores.at("crps_mean").get<double>(), 0.0);
  EXPECT_EQ(scores.at("coverage").get<double>(), 1.0);
  EXPECT_TRUE(scores.at("skill").at("mspe").is_null());
}

TEST(CliPipeline, DeesnAndBaselines) {
  const auto s = small_sim("cli_d");
  write(s.dir / "d.json", R"({"model":"deesn","seed":3,"n_res":1,"deesn":{"layers":2,"n_h_1":10,"n_h_deep":8,
      "reduced":[3],"burn_in":10,"n_basis":3,"n_iter":120,"mcmc_burn":20,"thin":2,"n_draws":10}})");
  ASSERT_EQ(run("train --config " + q(s.dir / "d.json") + " --data " + q(s.history) + " --out " + q(s.dir / "m")), 0);
  for (const char* f : {"deesn.json", "basis.bin", "reduction.bin", "chain.bin", "chain.json", "manifest.json"})
    EXPECT_TRUE(fs::exists(s.dir / "m" / f)) << f;
  ASSERT_EQ(run("forecast --model " + q(s.dir / "m") + " --data " + q(s.history) + " --horizon 2 --out " +
                q(s.dir / "f")),
            0);
  EXPECT_EQ(line_count(s.dir / "f" / "members.csv"), 1u + 2u * 12u * 10u);

  for (const std::string model : {"persistence", "climatology", "kriging"}) {
    const auto cfg = s.dir / (model + ".json");
    write(cfg, R"({"model":")" + model + R"(","kriging":{"n_samples":20}})");
    const auto out = s.dir / ("m_" + model);
    ASSERT_EQ(run("train --config " + q(cfg) + " --data " + q(s.history) + " --out " + q(out)), 0) << model;
    ASSERT_EQ(run("forecast --model " + q(out) + " --data " + q(s.history) + " --horizon 2 --out " +
                  q(s.dir / ("f_" + model))),
              0)
        << model;
    EXPECT_EQ(run("evaluate --forecast " + q(s.dir / ("f_" + model)) + " --truth " + q(s.data) + " --out " +
                  q(s.dir / ("e_" + model))),
              0)
        << model;
  }
}

TEST(CliTune, CvSingletonAndGaOneGeneration) {
  const auto s = small_sim("cli_tune");
  write(s.dir / "q.json", R"({"model":"qeesn","n_res":2,"qeesn":{"burn_in":10,
      "cv_grid":{"n_h":[12],"nu":[0.4],"r_v":[0.5]}}})");
  ASSERT_EQ(run("tune --method cv --config " + q(s.dir / "q.json") + " --data " + q(s.history) + " --out " +
                q(s.dir / "cv")),
            0);
  EXPECT_EQ(line_count(s.dir / "cv" / "cv_table.csv"), 2u);
  const auto chosen = load_config(s.dir / "cv" / "config.json");
  EXPECT_EQ(chosen.qeesn.reservoir.n_h, 12);
  EXPECT_EQ(chosen.qeesn.reservoir.nu, 0.4);
  EXPECT_EQ(chosen.qeesn.r_v, 0.5);

  write(s.dir / "d.json", R"({"model":"deesn","deesn":{"n_h_1":10,"n_h_deep":8,"reduced":[3],"burn_in":10,
      "ga":{"budget":20,"reduced_max":6}}})");
  ASSERT_EQ(run("tune --method ga --config " + q(s.dir / "d.json") + " --data " + q(s.history) + " --out " +
                q(s.dir / "ga")),
            0);
  const auto trace = parse_json_text(read_text_file(s.dir / "ga" / "ga_trace.json"), "trace");
  EXPECT_EQ(trace.at("trace").size(), 1u);
  EXPECT_EQ(trace.at("evaluations").get<int>(), 20);
  EXPECT_NO_THROW(load_config(s.dir / "ga" / "config.json"));
  EXPECT_EQ(run("tune --method ga --config " + q(s.dir / "q.json") + " --data " + q(s.history) + " --out " +
                q(s.dir / "bad")),
            2);
}
