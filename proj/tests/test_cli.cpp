#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "learnrate/cli.hpp"
#include "learnrate/distributions.hpp"
#include "learnrate/seeding.hpp"
#include "learnrate/spectral.hpp"

namespace fs = std::filesystem;
using namespace learnrate;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "learnrate");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

cli::ParsedCsv parse(const std::string& text) {
  std::istringstream in(text);
  return cli::read_csv(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("learnrate_test_" + name);
}

}  // namespace

TEST(Cli, SpectrumBoundsAllHold) {
  const auto r = run({"spectrum", "--n", "100", "--beta", "0", "--trials", "10", "--seed", "42"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = parse(r.out);
  EXPECT_EQ(csv.schema_version, 1);
  EXPECT_EQ(csv.columns, (std::vector<std::string>{"n", "seed", "lambda_star", "mu_star", "H", "C",
                                                   "bound_lo_ok", "bound_hi_ok"}));
  ASSERT_EQ(csv.rows.size(), 10u);
  for (const auto& row : csv.rows) {
    EXPECT_EQ(row[6], "true");
    EXPECT_EQ(row[7], "true");
  }
}

TEST(Cli, SpectrumRowsReproducibleFromSeedColumn) {
  const auto r = run({"spectrum", "--n", "30", "--trials", "3", "--seed", "5"});
  const auto csv = parse(r.out);
  for (const auto& row : csv.rows) {
    const auto inst = make_instance(make_distribution(Family::Uniform), 30, std::stoull(row[1]));
    EXPECT_EQ(std::stod(row[3]), smallest_derivative_root(inst.gaps()));
  }
  EXPECT_EQ(csv.rows[0][1], std::to_string(derive_seed(5, 0)));
}

TEST(Cli, LearnTwoSetEmpirical) {
  const auto r = run({"learn", "--overlaps", "0.5", "--delta", "0.1", "--method", "memoryless", "--exact"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = parse(r.out);
  ASSERT_EQ(csv.rows.size(), 1u);
  EXPECT_EQ(csv.rows[0][0], "memoryless_exact");
  EXPECT_EQ(csv.rows[0][1], "2");
  EXPECT_EQ(csv.rows[0][3], "3");
  EXPECT_EQ(csv.config["family"], "empirical");
}

TEST(Cli, LearnBothMethodsSimulated) {
  const auto r = run({"learn", "--n", "30", "--sim", "--trials", "2000", "--delta", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = parse(r.out);
  ASSERT_EQ(csv.rows.size(), 2u);
  EXPECT_EQ(csv.rows[0][0], "memoryless_sim");
  EXPECT_EQ(csv.rows[1][0], "fullmem_sim");
  EXPECT_EQ(csv.rows[0][4], "2000");
  EXPECT_GT(std::stod(csv.rows[0][5]), 0.0);
}

TEST(Cli, ByteIdenticalReruns) {
  const auto a = temp_path("a.csv"), b = temp_path("b.csv");
  for (const auto& p : {a, b}) {
    const auto r = run({"learn", "--n", "50", "--sim", "--trials", "500", "--seed", "9", "--output", p.string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  // The output path is part of the echoed config; compare everything else.
  auto strip = [](std::string s) {
    const auto pos = s.find("\"output\":");
    return s.substr(0, pos) + s.substr(s.find(',', pos));
  };
  EXPECT_EQ(strip(slurp(a)), strip(slurp(b)));
  EXPECT_EQ(run({"harmonic", "--n", "200", "--trials", "100"}).out,
            run({"harmonic", "--n", "200", "--trials", "100"}).out);
  fs::remove(a);
  fs::remove(b);
}

TEST(Cli, CsvRoundTripRecoversConfigAndValues) {
  const auto r = run({"spectrum", "--n", "20", "--beta", "-0.5", "--trials", "4", "--seed", "77"});
  const auto csv = parse(r.out);
  const auto config = cli::RunConfig::from_json(csv.config);
  EXPECT_EQ(config.to_json(), csv.config);
  EXPECT_EQ(config.family, "powergap");
  EXPECT_EQ(config.seed, 77u);
  // Rerunning the echoed config reproduces the file.
  std::ostringstream again;
  cli::write_csv(again, config, cli::execute(config));
  EXPECT_EQ(again.str(), r.out);
  // %.17g doubles parse back to the same bits.
  const auto inst = make_instance(make_distribution(Family::PowerGap, -0.5), 20, derive_seed(77, 0));
  EXPECT_EQ(std::stod(csv.rows[0][4]), harmonic_mean(inst.gaps()));
}

TEST(Cli, JsonFormat) {
  const auto r = run({"spectrum", "--n", "10", "--trials", "2", "--format", "json"});
  ASSERT_EQ(r.code, 0);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["schema_version"], 1);
  EXPECT_EQ(doc["rows"].size(), 2u);
  EXPECT_TRUE(doc["rows"][0].contains("lambda_star"));
  EXPECT_EQ(doc["config"]["subcommand"], "spectrum");
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto path = temp_path("config.json");
  {
    std::ofstream f(path);
    f << R"({"n": 40, "trials": 3, "seed": 8, "beta": 1.0})";
  }
  const auto r = run({"spectrum", "--config", path.string(), "--seed", "9"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = parse(r.out);
  EXPECT_EQ(csv.config["n"], 40);
  EXPECT_EQ(csv.config["seed"], 9);
  EXPECT_EQ(csv.config["family"], "powergap");
  EXPECT_EQ(csv.rows.size(), 3u);
  fs::remove(path);
}

TEST(Cli, HarmonicRowsAndDump) {
  const auto dump = temp_path("dump.csv");
  const auto r = run({"harmonic", "--beta", "2", "--n-grid", "100,400", "--trials", "200", "--tol", "0.5",
                      "--selfcheck", "--dump", dump.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = parse(r.out);
  EXPECT_EQ(csv.columns, (std::vector<std::string>{"n", "beta", "trials", "statistic_name", "estimate", "stderr"}));
  std::vector<std::string> names;
  for (const auto& row : csv.rows) names.push_back(row[3]);
  EXPECT_EQ(std::count(names.begin(), names.end(), "mu_H"), 2);
  EXPECT_EQ(std::count(names.begin(), names.end(), "lln_violation_fraction"), 2);
  EXPECT_EQ(std::count(names.begin(), names.end(), "transform_discrepancy"), 2);
  const auto d = parse(slurp(dump));
  EXPECT_EQ(d.columns, (std::vector<std::string>{"n", "trial", "Y"}));
  EXPECT_EQ(d.rows.size(), 400u);
  fs::remove(dump);
}

TEST(Cli, StableSubcommand) {
  const auto r = run({"stable", "--alpha", "0.5", "--trials", "20000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = parse(r.out);
  ASSERT_EQ(csv.rows.size(), 2u);
  EXPECT_EQ(csv.rows[0][3], "median");
  // Median of the Laplace-exp(-sqrt s) law is 1 / (4 erfcinv(1/2)^2) ~ 1.0991.
  EXPECT_NEAR(std::stod(csv.rows[0][4]), 1.0991, 0.05);
}

TEST(Cli, ScalingWithSummary) {
  const auto summary = temp_path("summary.json");
  const auto r = run({"scaling", "--n-grid", "64,128,256,512", "--trials", "10", "--method", "memoryless",
                      "--summary", summary.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = parse(r.out);
  EXPECT_EQ(csv.columns, (std::vector<std::string>{"n", "beta", "delta", "method", "N_delta_estimate",
                                                   "estimator", "stderr", "seed"}));
  EXPECT_EQ(csv.rows.size(), 4u);
  const auto doc = nlohmann::json::parse(slurp(summary));
  EXPECT_EQ(doc["calibrated"], true);
  EXPECT_EQ(doc["fits"][0]["method"], "memoryless");
  fs::remove(summary);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"spectrum", "--bogus"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  const auto bad_n = run({"spectrum", "--n", "1"});
  EXPECT_EQ(bad_n.code, 2);
  EXPECT_NE(bad_n.err.find("--n"), std::string::npos);
  EXPECT_EQ(run({"learn", "--beta", "-1"}).code, 2);
  EXPECT_EQ(run({"learn", "--delta", "1.5"}).code, 2);
  EXPECT_EQ(run({"learn", "--exact", "--sim"}).code, 2);
  EXPECT_EQ(run({"stable", "--alpha", "1.2"}).code, 2);
  EXPECT_EQ(run({"harmonic", "--beta", "-0.5", "--tol", "0.1"}).code, 2);
  EXPECT_EQ(run({"spectrum", "--config", "/nonexistent/cfg.json"}).code, 2);
  EXPECT_EQ(run({"spectrum", "--trials", "1", "--output", "/nonexistent/dir/out.csv"}).code, 1);
  EXPECT_EQ(run({"spectrum", "--help"}).code, 0);
}

TEST(Cli, BinaryRuns) {
  const auto out = temp_path("bin.csv");
  const std::string cmd = std::string(LEARNRATE_CLI) + " learn --overlaps 0.5 --delta 0.1 --method memoryless -o " +
                          out.string();
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_EQ(parse(slurp(out)).rows[0][3], "3");
  fs::remove(out);
}
