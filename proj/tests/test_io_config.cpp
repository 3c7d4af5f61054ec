#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "nlinv/config.hpp"
#include "nlinv/errors.hpp"
#include "nlinv/io.hpp"

using namespace nlinv;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nlinv_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string config_error(const Json& j) {
  try {
    ObjectReader r(j, "");
    read_problem(r, ".");
    r.finish();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

Json base_problem() {
  return Json::parse(R"({
    "kernel": {"family": "sobolev1d", "params": {"order": 1}, "domain": [0, 1]},
    "grid": {"a": 0, "b": 1, "n": 16},
    "operator": {"kind": "quadratic_integral", "theta": "volterra"},
    "fbar": {"constant": 2}
  })");
}

}  // namespace

TEST(Json, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345678.9}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Json, KernelRoundTrip) {
  for (const Kernel& k : {Kernel::gaussian(0.3, {-1.0, 2.0}), Kernel::sobolev1d(1), Kernel::matern(1.5, 0.2)}) {
    const Kernel back = kernel_from_json(kernel_to_json(k));
    EXPECT_EQ(back.family(), k.family());
    EXPECT_EQ(back.domain().a, k.domain().a);
    EXPECT_EQ(back.domain().b, k.domain().b);
    for (double x : {0.0, 0.25, 0.7}) EXPECT_EQ(back(x, 0.1), k(x, 0.1));
  }
  EXPECT_THROW(kernel_from_json(Json::parse(R"({"family": "cauchy"})")), ConfigError);
  EXPECT_THROW(kernel_from_json(Json::parse(R"({"family": "gaussian", "params": {"lengthscale": -1}})")), ConfigError);
}

TEST(Json, GridRoundTrip) {
  const GridPtr g = make_trapezoid_grid({0.0, 2.0}, 33, true);
  const GridPtr back = grid_from_json(grid_to_json(*g));
  EXPECT_TRUE(same_grid(*g, *back));
  EXPECT_THROW(grid_from_json(Json::parse(R"({"n": 1})")), ConfigError);
  EXPECT_THROW(grid_from_json(Json::parse(R"({"n": 8, "rule": "simpson"})")), ConfigError);
  EXPECT_THROW(grid_from_json(Json::parse(R"({"n": 8, "spacing": 2})")), ConfigError);
}

TEST(Samples, CsvRoundTripIsExact) {
  const fs::path dir = temp_dir("samples");
  SampleSet s;
  s.x = {0.1, 1.0 / 3.0, 0.9};
  s.y = {-1e-17, 2.0 / 7.0, 5.5};
  s.seed = 18446744073709551557ull;
  s.noise = bernstein_certificate(NoiseModel::truncated_gaussian, 0.2);
  save_samples(s, dir / "s.csv");
  EXPECT_TRUE(fs::exists(dir / "s.csv.meta.json"));
  EXPECT_EQ(read_text(dir / "s.csv").substr(0, 4), "x,y\n");
  const SampleSet b = load_samples(dir / "s.csv");
  EXPECT_EQ(b.x, s.x);
  EXPECT_EQ(b.y, s.y);
  EXPECT_EQ(b.seed, s.seed);
  EXPECT_EQ(b.noise.model, s.noise.model);
  EXPECT_EQ(b.noise.sigma, s.noise.sigma);
  EXPECT_EQ(b.noise.M, s.noise.M);
  EXPECT_EQ(b.noise.Sigma_bernstein, s.noise.Sigma_bernstein);
  write_text(dir / "bad.csv", "x,y\n0.1,abc\n");
  EXPECT_ANY_THROW(load_samples(dir / "bad.csv"));
}

TEST(Theta, CsvTable) {
  const fs::path dir = temp_dir("theta");
  const GridPtr g = make_trapezoid_grid({0.0, 1.0}, 3, true);
  write_text(dir / "t.csv", "x,0,0.5,1\n0,1,2,3\n1,4,5,6\n");
  const Theta t = load_theta_csv(dir / "t.csv", *g);
  EXPECT_TRUE(t.is_table());
  const std::vector<double> x{0.0, 0.5, 1.0};
  const Matrix r = t.rows(x, *g);
  EXPECT_EQ(r(0, 2), 3.0);
  EXPECT_EQ(r(1, 0), 2.5);
  EXPECT_EQ(r(2, 1), 5.0);
  write_text(dir / "short.csv", "0,1,2\n");
  EXPECT_ANY_THROW(load_theta_csv(dir / "short.csv", *g).rows(x, *g));
}

TEST(Config, ProblemReads) {
  const Json j = base_problem();
  ObjectReader r(j, "");
  const Problem p = read_problem(r, ".");
  r.finish();
  EXPECT_EQ(p.grid->size(), 16);
  EXPECT_EQ(p.op->kind(), OpKind::quadratic_integral);
  EXPECT_EQ(p.fbar.values()(5), 2.0);
}

TEST(Config, UnknownKeysAreRejected) {
  Json j = base_problem();
  j["operator"]["thetaa"] = "one";
  EXPECT_NE(config_error(j).find("operator.thetaa"), std::string::npos);
  j = base_problem();
  j["lamda"] = 0.1;
  EXPECT_NE(config_error(j).find("lamda: unknown key"), std::string::npos);
}

TEST(Config, MalformedValuesNameTheKey) {
  Json j = base_problem();
  j["operator"]["kind"] = "cubic";
  EXPECT_NE(config_error(j).find("operator.kind"), std::string::npos);
  j = base_problem();
  j["operator"]["gamma"] = -1;
  EXPECT_NE(config_error(j).find("operator.gamma"), std::string::npos);
  j = base_problem();
  j["fbar"] = Json::parse(R"({"values": [1, 2]})");
  EXPECT_NE(config_error(j).find("fbar"), std::string::npos);
  j = base_problem();
  j["kernel"]["domain"] = Json::array({0, 2});
  EXPECT_NE(config_error(j), "");

  const Json lam = Json::parse(R"({"lambda": -1})");
  ObjectReader r(lam, "");
  try {
    r.positive("lambda");
    FAIL() << "negative lambda accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()), "lambda: must be positive (got -1)");
  }
}

TEST(Config, IndexFunctionAndStudy) {
  const IndexFunction phi = read_index_function(ObjectReader(Json::parse(R"({"family": "holder", "r": 0.5})"), "phi"));
  EXPECT_EQ(phi.r(), 0.5);
  const Json back = index_function_to_json(phi);
  EXPECT_EQ(back["family"], "holder");
  EXPECT_THROW(read_index_function(ObjectReader(Json::parse(R"({"family": "log_type", "p": 1})"), "phi")), ConfigError);

  const Json study = Json::parse(R"({"ms": [50, 100, 200], "replicates": 4, "noise_sigma": 0.1})");
  const RateStudyConfig c = read_rate_study(ObjectReader(study, "study"));
  EXPECT_EQ(c.ms.size(), 3u);
  EXPECT_EQ(c.replicates, 4);
  Json bad = study;
  bad["noise_sigma"] = -0.1;
  EXPECT_THROW(read_rate_study(ObjectReader(bad, "study")), ConfigError);
  bad = study;
  bad["ms"] = Json::array({100, 50, 200});
  EXPECT_THROW(read_rate_study(ObjectReader(bad, "study")), ConfigError);

  const Json src = Json::parse(R"({"phi": {"family": "holder", "r": 0.5}, "R": 1, "g_norm": 2})");
  EXPECT_THROW(read_source_spec(ObjectReader(src, "source")), ConfigError);
}

TEST(Csv, FitRows) {
  EXPECT_EQ(fit_csv_header(), "m,lambda,gn_iters,converged,residual_norm,h1_penalty,err_h1,err_pred\n");
  const GridPtr g = make_trapezoid_grid({0.0, 1.0}, 4, true);
  TikhonovFit fit{H1Vec::zeros(H1Space::weighted_l2(g))};
  fit.lambda = 0.25;
  fit.gn_iters = 3;
  fit.converged = true;
  fit.residual_norm = 0.5;
  fit.h1_penalty = 0.125;
  EXPECT_EQ(fit_csv_row(10, fit, std::nullopt, std::nullopt), "10,0.25,3,true,0.5,0.125,,\n");
  EXPECT_EQ(fit_csv_row(10, fit, 0.1, 0.2), "10,0.25,3,true,0.5,0.125,0.10000000000000001,0.20000000000000001\n");
}
