#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "nlinv/cli.hpp"
#include "nlinv/io.hpp"

using namespace nlinv;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(NLINV_SOURCE_DIR) / "configs";

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nlinv_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "nlinv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<double> column(const std::string& csv, std::size_t col) {
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  std::vector<double> v;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string cell;
    for (std::size_t c = 0; c <= col; ++c) std::getline(ls, cell, ',');
    v.push_back(std::stod(cell));
  }
  return v;
}

}  // namespace

TEST(Cli, IdentitySolveReturnsFbarForHugeLambda) {
  const fs::path out = temp_dir("identity");
  const Result r = invoke({"solve", "--config", (kConfigs / "solve_identity.json").string(), "--out", out.string()});
  ASSERT_EQ(r.code, cli::ok) << r.err;
  for (const char* f : {"fit.csv", "solution.csv", "samples.csv", "samples.csv.meta.json"}) EXPECT_TRUE(fs::exists(out / f));
  for (double v : column(read_text(out / "solution.csv"), 1)) EXPECT_NEAR(v, 0.5, 1e-4);
}

TEST(Cli, NegativeLambdaIsAConfigError) {
  const fs::path dir = temp_dir("neglambda");
  Json j = read_json(kConfigs / "solve_identity.json");
  j["lambda"] = -1;
  write_text(dir / "c.json", j.dump());
  const Result r = invoke({"solve", "--config", (dir / "c.json").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, cli::config_error);
  EXPECT_NE(r.err.find("lambda"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "fit.csv"));
}

TEST(Cli, UnknownKeyIsAConfigError) {
  const fs::path dir = temp_dir("unknown");
  Json j = read_json(kConfigs / "solve_identity.json");
  j["lamda"] = 1;
  write_text(dir / "c.json", j.dump());
  const Result r = invoke({"solve", "--config", (dir / "c.json").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, cli::config_error);
  EXPECT_NE(r.err.find("lamda"), std::string::npos) << r.err;
}

TEST(Cli, MissingConfigFile) {
  const Result r = invoke({"solve", "--config", "/nonexistent/c.json"});
  EXPECT_EQ(r.code, cli::config_error);
}

TEST(Cli, GoldenSolveIsByteIdentical) {
  const fs::path a = temp_dir("golden_a"), b = temp_dir("golden_b");
  const std::string cfg = (kConfigs / "solve_golden.json").string();
  ASSERT_EQ(invoke({"solve", "--config", cfg, "--out", a.string()}).code, cli::ok);
  ASSERT_EQ(invoke({"solve", "--config", cfg, "--out", b.string()}).code, cli::ok);
  for (const char* f : {"fit.csv", "solution.csv", "samples.csv"}) EXPECT_EQ(read_text(a / f), read_text(b / f)) << f;
  const Result c = invoke({"solve", "--config", cfg, "--out", b.string(), "--seed", "43"});
  ASSERT_EQ(c.code, cli::ok);
  EXPECT_NE(read_text(a / "samples.csv"), read_text(b / "samples.csv"));
}

TEST(Cli, CheckSuites) {
  EXPECT_EQ(invoke({"check", "bogus"}).code, cli::config_error);
  for (const char* suite : {"hs", "effdim"}) {
    const Result r = invoke({"check", suite});
    EXPECT_EQ(r.code, cli::ok) << r.out;
    EXPECT_NE(r.out.find("PASS"), std::string::npos);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  }
}

TEST(Cli, EffdimWritesTables) {
  const fs::path out = temp_dir("effdim");
  const Result r = invoke({"effdim", "--config", (kConfigs / "effdim.json").string(), "--out", out.string()});
  ASSERT_EQ(r.code, cli::ok) << r.err;
  const std::string csv = read_text(out / "effdim.csv");
  const std::vector<double> lam = column(csv, 0), val = column(csv, 1), triv = column(csv, 2), kap = column(csv, 3);
  ASSERT_EQ(lam.size(), 30u);
  for (std::size_t i = 0; i < lam.size(); ++i) {
    EXPECT_LE(val[i], triv[i] * (1 + 1e-12));
    EXPECT_LE(val[i], kap[i] * (1 + 1e-12));
    if (i > 0 && lam[i] > lam[i - 1]) EXPECT_LE(val[i], val[i - 1]);
  }
  EXPECT_TRUE(fs::exists(out / "spectrum.csv"));
}

TEST(Cli, SmokeRateStudyIsFastAndWorkerIndependent) {
  const fs::path a = temp_dir("rate_a"), b = temp_dir("rate_b");
  const std::string cfg = (kConfigs / "rate_smoke.json").string();
  const auto t0 = std::chrono::steady_clock::now();
  const Result ra = invoke({"rate-study", "--config", cfg, "--out", a.string(), "--workers", "1"});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_EQ(ra.code, cli::ok) << ra.err;
  EXPECT_LT(secs, 60.0);
  const Result rb = invoke({"rate-study", "--config", cfg, "--out", b.string(), "--workers", "3"});
  ASSERT_EQ(rb.code, cli::ok) << rb.err;
  EXPECT_EQ(read_text(a / "results.csv"), read_text(b / "results.csv"));
  const Json s = read_json(a / "summary.json");
  EXPECT_TRUE(s.contains("fitted_slope_h1"));
  EXPECT_EQ(column(read_text(a / "results.csv"), 0).size(), 6u);
}

TEST(Cli, PoolExecutorRunsEveryJobOnce) {
  std::vector<std::atomic<int>> hits(97);
  cli::make_pool_executor(4)(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}
