#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "scusum/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using scusum::cli::cli_main;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const char* env = std::getenv("SCUSUM_TEST_TMP");
  const fs::path dir = fs::path(env ? env : fs::temp_directory_path().string()) / "cli_scratch";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Cli, TheoryReportsOptimalWindow) {
  const auto r = run({"theory", "--sizes", "12,6", "--sigma", "0.25", "--gamma", "1000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["w_star"].get<double>(), 2.64100, 5e-6);
  EXPECT_EQ(j["C"].get<double>(), 24.0);
  EXPECT_EQ(j["lambda"], json::array({12.0, 6.0}));
  // w* is too short for delta* here; the fields are null and flagged.
  EXPECT_TRUE(j["delta_star"].is_null());
  EXPECT_FALSE(j["valid"]["delta_star"].get<bool>());
  EXPECT_TRUE(j["valid"]["ratio"].get<bool>());
  for (const char* key : {"M", "d_star", "I0", "edd_exact", "edd_spectral", "ratio"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(Cli, TheoryWithExplicitWindow) {
  const auto r = run({"theory", "--sizes", "12,6", "--sigma", "1", "--window", "50"});
  // m^2/sigma - 2m = 0 at sigma = m/2 = 1: w* is undefined, exit 3.
  EXPECT_EQ(r.code, scusum::cli::kExitValidity);
  const auto ok = run({"theory", "--eigenvalues", "2,1", "--sigma", "0.25", "--window", "50",
                       "--gamma", "1000"});
  ASSERT_EQ(ok.code, 0) << ok.err;
  const json j = json::parse(ok.out);
  EXPECT_NEAR(j["delta_star"].get<double>(), (2 - 24.0 / 2500) / 0.0625, 1e-12);
  EXPECT_TRUE(j["I0"].is_null());
}

TEST(Cli, SimulateDetectPipelineNoiseless) {
  const auto stream = scratch("noiseless.ndjson");
  ASSERT_EQ(run({"simulate", "--sizes", "2,1", "--sigma", "0", "--tau", "0", "--horizon", "10",
                 "--out", stream.string()})
                .code,
            0);

  const auto trace = scratch("exact.csv");
  auto r = run({"detect", "--in", stream.string(), "--method", "exact", "--sizes", "2,1", "-b",
                "12", "--out", trace.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  json j = json::parse(r.out);
  EXPECT_EQ(j["stop_time"].get<int>(), 3);
  EXPECT_EQ(slurp(trace), "t,statistic,alarmed\n1,5,0\n2,10,0\n3,15,1\n");

  r = run({"detect", "--in", stream.string(), "--method", "spectral", "--m", "2", "--window",
           "2", "--drift", "1", "-b", "3.5", "--out", trace.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  j = json::parse(r.out);
  EXPECT_EQ(j["stop_time"].get<int>(), 4);
  EXPECT_EQ(j["stop_index"].get<int>(), 2);
  EXPECT_EQ(j["lag"].get<int>(), 2);
}

TEST(Cli, SimulateIsReproducibleAndDetectTraceIsMonotone) {
  const std::vector<std::string> sim{"simulate", "--nodes", "50", "--sizes", "10,10,15",
                                     "--sigma", "6", "--tau", "100", "--horizon", "300",
                                     "--seed", "7"};
  const auto a = run(sim);
  const auto b = run(sim);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  std::istringstream in(a.out);
  const auto stream = scusum::io::read_stream(in);
  ASSERT_EQ(stream.size(), 300u);
  EXPECT_EQ(stream.front().n(), 50);

  const auto path = scratch("scenario.ndjson");
  write(path, a.out);
  const auto r = run({"detect", "--in", path.string(), "--method", "spectral", "--m", "3",
                      "--window", "5", "-b", "1e9"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(r.out);
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "t,statistic,alarmed");
  long prev = 0, rows = 0;
  while (std::getline(csv, line)) {
    const long t = std::stol(line.substr(0, line.find(',')));
    EXPECT_EQ(t, prev + 1);
    prev = t;
    ++rows;
  }
  EXPECT_EQ(rows, 295);
  // Report went to stderr because the trace used stdout.
  EXPECT_FALSE(json::parse(r.err)["alarm"].get<bool>());
}

TEST(Cli, ConfigFileAndFlagOverride) {
  const auto cfg = scratch("sim.ini");
  write(cfg, "# scenario\nsizes = 2,1\nsigma = 0\ntau = 0\nhorizon = 4\n");
  auto r = run({"simulate", "--config", cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  EXPECT_EQ(scusum::io::read_stream(in).size(), 4u);

  r = run({"simulate", "--config", cfg.string(), "--horizon", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in7(r.out);
  EXPECT_EQ(scusum::io::read_stream(in7).size(), 7u);

  write(cfg, "sizes = [2, 1]\nhorizon = 2\n");
  r = run({"simulate", "--config", cfg.string()});
  EXPECT_EQ(r.code, 0) << r.err;

  const auto theory_cfg = scratch("theory.ini");
  write(theory_cfg, "sizes = 12,6\nsigma = 0.25\ngamma = 1000\n");
  r = run({"theory", "--config", theory_cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out)["w_star"].get<double>(), 2.641, 1e-3);
}

TEST(Cli, UnknownConfigKeyIsRejected) {
  const auto cfg = scratch("bad.ini");
  write(cfg, "sizes = 2,1\nbogus = 3\n");
  const auto r = run({"simulate", "--config", cfg.string()});
  EXPECT_EQ(r.code, scusum::cli::kExitUsage);
  EXPECT_NE(r.err.find("bogus"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, scusum::cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, scusum::cli::kExitUsage);
  EXPECT_EQ(run({"simulate"}).code, scusum::cli::kExitUsage);
  EXPECT_EQ(run({"simulate", "--sizes", "2,1", "--tau", "soon"}).code, scusum::cli::kExitUsage);
  EXPECT_EQ(run({"simulate", "--sizes", "2,1", "--bogus", "1"}).code, scusum::cli::kExitUsage);
  EXPECT_EQ(run({"theory", "--sizes", "2,1", "--eigenvalues", "2,1"}).code,
            scusum::cli::kExitUsage);
  EXPECT_EQ(run({"detect", "--in", "/nonexistent/stream.ndjson"}).code,
            scusum::cli::kExitRuntime);
  EXPECT_EQ(run({"calibrate", "--sizes", "2,1", "--method", "exact", "--gamma", "50", "--cap",
                 "100"})
                .code,
            scusum::cli::kExitValidity);
  EXPECT_EQ(run({"theory", "--sizes", "2,2"}).code, scusum::cli::kExitValidity);
  EXPECT_EQ(run({"simulate", "--help"}).code, 0);
}

TEST(Cli, CalibrateAndBench) {
  auto r = run({"calibrate", "--sizes", "2,1", "--method", "exact", "--scale", "likelihood",
                "--gamma", "20", "--reps", "200", "--cap", "1000", "--rel-tol", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json cal = json::parse(r.out);
  EXPECT_GT(cal["b"].get<double>(), 0.0);
  EXPECT_NEAR(cal["probe_arl"].get<double>(), 20.0, 2.0);

  const auto oc = scratch("oc.csv");
  r = run({"bench", "--sizes", "2,1", "--method", "exact", "--scale", "likelihood", "--gammas",
           "20,50", "--reps", "200", "--cap", "1000", "--rel-tol", "0.1", "--out",
           oc.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(oc);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "gamma,b,edd,se");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_EQ(json::parse(r.out)["rows"].size(), 2u);
}

TEST(Cli, XcorrFromSensorCsv) {
  const auto csv = scratch("sensors.csv");
  write(csv, "a,b,c\n1,2,-1\n2,4,-2\n3,6,-3\n4,8,-4\n5,5,5\n5,5,5\n");
  const auto out = scratch("x.ndjson");
  const auto r = run({"xcorr", "--in", csv.string(), "--segment", "2", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto stream = scusum::io::read_stream(out);
  ASSERT_EQ(stream.size(), 3u);
  EXPECT_NEAR(stream[0].weights(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(stream[0].weights(0, 2), -1.0, 1e-15);
  EXPECT_EQ(stream[2].weights(0, 0), 0.0);
  EXPECT_NE(r.err.find("zero-variance"), std::string::npos);
}
