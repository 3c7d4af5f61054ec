#include "nlinv/cli.hpp"

#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "nlinv/checks.hpp"
#include "nlinv/config.hpp"
#include "nlinv/errors.hpp"

namespace nlinv::cli {

namespace fs = std::filesystem;

Executor make_pool_executor(int workers) {
  return [workers](std::size_t n, const std::function<void(std::size_t)>& job) {
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
    if (threads <= 1) {
      run_sequential(n, job);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex mu;
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  };
}

namespace {

struct Options {
  std::string config;
  std::string out_dir = ".";
  long long seed = 0;
  bool seed_given = false;
  int workers = 1;
  bool verbose = false;
  std::string suite;
};

struct Context {
  const Options& opt;
  std::ostream& out;
  std::ostream& err;
  fs::path base_dir;

  void log(const std::string& msg) const {
    if (opt.verbose) err << "nlinv: " << msg << "\n";
  }
  fs::path output(const std::string& name) const { return fs::path(opt.out_dir) / name; }
  std::uint64_t seed(ObjectReader& root) const {
    const long long s = root.integer_or("seed", 0);
    return static_cast<std::uint64_t>(opt.seed_given ? opt.seed : s);
  }
};

Json load_config(const Options& opt) {
  if (opt.config.empty()) throw ConfigError("--config is required for this command");
  return read_json(opt.config);
}

void prepare_out(const Options& opt) { fs::create_directories(opt.out_dir); }

std::string brief(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string values_csv(const H1Vec& f) {
  std::string s = "x,value\n";
  for (Eigen::Index i = 0; i < f.size(); ++i)
    s += format_double(f.grid().nodes(i)) + "," + format_double(f.values()(i)) + "\n";
  return s;
}

int cmd_solve(const Context& ctx, const Json& doc) {
  ObjectReader root(doc, "");
  Problem p = read_problem(root, ctx.base_dir);
  const double lambda = root.positive("lambda");
  const std::uint64_t seed = ctx.seed(root);
  const SolveOptions so = root.has("solver") ? read_solve_options(root.object("solver")) : SolveOptions{};
  if (root.has("data") == root.has("simulate")) throw ConfigError("give exactly one of data, simulate");

  std::optional<fs::path> data_path;
  int m = 0;
  double sigma = 0.0;
  NoiseModel model = NoiseModel::gaussian;
  std::optional<SourceSpec> source;
  std::optional<H1Vec> truth;
  if (root.has("data")) {
    ObjectReader d = root.object("data");
    fs::path csv = d.string("csv");
    d.finish();
    data_path = csv.is_relative() ? ctx.base_dir / csv : csv;
  } else {
    ObjectReader s = root.object("simulate");
    const long long mm = s.integer("m");
    if (mm < 1) throw ConfigError(s.key_path("m") + ": must be at least 1");
    m = static_cast<int>(mm);
    sigma = s.number_or("noise_sigma", 0.0);
    if (sigma < 0.0) throw ConfigError(s.key_path("noise_sigma") + ": must be non-negative");
    if (s.has("noise_model")) {
      const std::string nm = s.string("noise_model");
      try {
        model = noise_model_from_string(nm);
      } catch (const std::exception&) {
        throw ConfigError(s.key_path("noise_model") + ": unknown noise model '" + nm + "'");
      }
    }
    ObjectReader t = s.object("truth");
    if (t.has("source")) {
      source = read_source_spec(t.object("source"));
      t.finish();
    } else {
      truth = read_h1_vector(t, p.h1);
    }
    s.finish();
  }
  root.finish();

  SampleSet data;
  if (data_path) {
    data = load_samples(*data_path);
  } else {
    if (source) truth = build_source_truth(*p.op, p.fbar, *source).f_rho;
    data = simulate(*p.op, *truth, m, sigma, seed, model);
  }
  ctx.log("solving with m = " + std::to_string(data.m()) + ", lambda = " + brief(lambda));
  const TikhonovFit fit = tikhonov_solve(*p.op, data, p.fbar, lambda, so);

  prepare_out(ctx.opt);
  std::optional<double> e1, e2;
  if (truth) {
    e1 = norm(fit.solution - *truth);
    e2 = prediction_error(*p.op, fit.solution, *truth);
  }
  write_text(ctx.output("fit.csv"), fit_csv_header() + fit_csv_row(static_cast<int>(data.m()), fit, e1, e2));
  write_text(ctx.output("solution.csv"), values_csv(fit.solution));
  if (!data_path) save_samples(data, ctx.output("samples.csv"));
  if (!fit.converged) {
    ctx.err << "nlinv: solver did not converge: " << fit.message << "\n";
    return numerical_error;
  }
  ctx.out << "converged in " << fit.gn_iters << " iterations, residual " << brief(fit.residual_norm) << "\n";
  return ok;
}

Json criterion(const std::string& name, double value, double target, double tol) {
  return Json{{"name", name}, {"value", value}, {"target", target}, {"tolerance", tol},
              {"pass", std::abs(value - target) <= tol}};
}

int cmd_rate_study(const Context& ctx, const Json& doc) {
  ObjectReader root(doc, "");
  Problem p = read_problem(root, ctx.base_dir);
  const std::uint64_t seed = ctx.seed(root);
  const SourceSpec spec = read_source_spec(root.object("source"));
  RateStudyConfig cfg = read_rate_study(root.object("study"));
  if (root.has("solver")) cfg.solve = read_solve_options(root.object("solver"));
  double h1_tol = 0.15, pred_tol = 0.15;
  bool enforce = false;
  if (root.has("criteria")) {
    ObjectReader c = root.object("criteria");
    h1_tol = c.number_or("h1_tolerance", h1_tol);
    pred_tol = c.number_or("pred_tolerance", pred_tol);
    enforce = c.boolean_or("enforce", enforce);
    c.finish();
  }
  root.finish();
  cfg.phi = spec.phi;
  cfg.R = spec.R;
  cfg.seed = seed;
  try {
    cfg.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("study: ") + e.what());
  }

  ctx.log("building the source truth");
  const SourceTruth truth = build_source_truth(*p.op, p.fbar, spec);
  ctx.log("running " + std::to_string(cfg.ms.size() * cfg.replicates) + " replicates on " +
          std::to_string(ctx.opt.workers) + " workers");
  const RateStudyResult res = run_rate_study(cfg, *p.op, *p.h2, p.fbar, truth.f_rho, make_pool_executor(ctx.opt.workers));

  const double gamma = p.op->is_linear() ? 0.0 : p.op->nonlinearity_gamma.value_or(quadratic_gamma_bound(*p.op));
  Json summary;
  summary["fitted_slope_h1"] = res.fitted_slope_h1;
  summary["fitted_slope_pred"] = res.fitted_slope_pred;
  summary["theoretical_h1"] = res.theoretical_h1;
  summary["theoretical_pred"] = res.theoretical_pred;
  summary["slope_stderr"] = res.slope_stderr;
  summary["slope_stderr_pred"] = res.slope_stderr_pred;
  summary["b"] = res.b;
  summary["failures"] = res.failures;
  summary["ms"] = res.ms;
  summary["median_h1"] = res.median_h1;
  summary["median_pred"] = res.median_pred;
  summary["exponents"] = {{"r", res.exponents.r},
                          {"h1", res.exponents.h1_exponent},
                          {"prediction", res.exponents.prediction_exponent},
                          {"outside_theory", res.exponents.outside_theory},
                          {"saturated", res.exponents.saturated}};
  summary["regime"] = {{"ms_with_cells_in_regime", res.regime_ms},
                       {"slope_h1", res.regime_slope_h1 ? Json(*res.regime_slope_h1) : Json(nullptr)}};
  summary["truth"] = {{"g_norm", truth.g_norm},          {"halvings", truth.halvings},
                      {"iterations", truth.iterations},  {"residual", truth.residual},
                      {"w_norm", truth.w_norm},          {"gamma", gamma},
                      {"smallness", smallness_check(gamma, truth.w_norm)}};
  Json crit = Json::array();
  crit.push_back(criterion("h1_slope", res.fitted_slope_h1, res.theoretical_h1, h1_tol));
  crit.push_back(criterion("pred_slope", res.fitted_slope_pred, res.theoretical_pred, pred_tol));
  crit.push_back(criterion("pred_vs_twice_h1", res.fitted_slope_pred, 2.0 * res.fitted_slope_h1, pred_tol));
  summary["criteria"] = crit;

  prepare_out(ctx.opt);
  write_text(ctx.output("results.csv"), rate_rows_csv(res));
  write_text(ctx.output("timings.csv"), rate_timings_csv(res));
  write_text(ctx.output("summary.json"), summary.dump(2) + "\n");

  bool all_pass = true;
  for (const Json& c : crit) {
    ctx.out << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << ": "
            << brief(c["value"].get<double>()) << " vs " << brief(c["target"].get<double>()) << " +- "
            << brief(c["tolerance"].get<double>()) << "\n";
    all_pass = all_pass && c["pass"].get<bool>();
  }
  return enforce && !all_pass ? property_failure : ok;
}

int cmd_effdim(const Context& ctx, const Json& doc) {
  ObjectReader root(doc, "");
  const Json empty = Json::object();
  const GridPtr grid = grid_from_json(root.has("grid") ? root.raw("grid") : empty, "grid");
  const Kernel k = kernel_from_json(root.raw("kernel"), "kernel");
  if (k.domain().a != grid->domain.a || k.domain().b != grid->domain.b)
    throw ConfigError("kernel.domain: must match the grid interval");
  std::vector<double> lambdas;
  if (root.has("lambdas") == root.has("lambda_grid")) throw ConfigError("give exactly one of lambdas, lambda_grid");
  if (root.has("lambdas")) {
    lambdas = root.numbers("lambdas");
  } else {
    ObjectReader g = root.object("lambda_grid");
    const double lo = g.positive("min"), hi = g.positive("max");
    const long long count = g.integer("count");
    g.finish();
    if (!(lo < hi) || count < 2) throw ConfigError("lambda_grid: need min < max and count >= 2");
    for (long long i = 0; i < count; ++i)
      lambdas.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(count - 1)));
  }
  for (double l : lambdas)
    if (!(l > 0.0)) throw ConfigError("lambdas: must be positive");
  std::optional<DecayParams> given;
  if (root.has("decay")) {
    ObjectReader d = root.object("decay");
    given = DecayParams{d.positive("b"), d.positive("beta")};
    d.finish();
    if (!(given->b > 1.0)) throw ConfigError("decay.b: must exceed 1");
  }
  root.finish();

  const Vector sw = grid->probability_weights().cwiseSqrt();
  const Matrix cov = sw.asDiagonal() * gram(k, grid->node_span()) * sw.asDiagonal();
  const Vector eigs = sym_eig(cov).values.cwiseMax(0.0);
  const EigenDecay fit = fit_decay(eigs);
  const double kap = kappa(k, grid->node_span());
  std::optional<DecayParams> decay = given;
  if (!decay && !fit.degenerate) decay = DecayParams{fit.fitted_b, fit.fitted_beta};

  std::string csv = "lambda,value,trivial_bound,kappa_bound,decay_bound\n";
  bool holds = true;
  for (double l : lambdas) {
    const EffDim e = effective_dimension(eigs, l, decay);
    const double kb = kap * kap / l;
    holds = holds && e.value <= kb * (1.0 + 1e-12);
    csv += format_double(l) + "," + format_double(e.value) + "," + format_double(e.trivial_bound) + "," +
           format_double(kb) + "," + (e.decay_bound ? format_double(*e.decay_bound) : "") + "\n";
  }
  std::string spec_csv = "n,eigenvalue\n";
  for (Eigen::Index i = 0; i < eigs.size(); ++i) spec_csv += std::to_string(i + 1) + "," + format_double(eigs(i)) + "\n";
  Json dj{{"fitted_b", fit.fitted_b},   {"fitted_beta", fit.fitted_beta}, {"fit_residual", fit.fit_residual},
          {"n_reliable", fit.n_reliable}, {"degenerate", fit.degenerate}, {"kappa", kap}};
  if (decay) dj["decay_constant"] = effdim_decay_constant(*decay);

  prepare_out(ctx.opt);
  write_text(ctx.output("effdim.csv"), csv);
  write_text(ctx.output("spectrum.csv"), spec_csv);
  write_text(ctx.output("decay.json"), dj.dump(2) + "\n");
  if (!holds) {
    ctx.err << "nlinv: effective dimension exceeds kappa^2 / lambda\n";
    return property_failure;
  }
  ctx.out << "fitted b = " << brief(fit.fitted_b) << " from " << fit.n_reliable << " eigenvalues\n";
  return ok;
}

int cmd_lower_bound(const Context& ctx, const Json& doc) {
  ObjectReader root(doc, "");
  Problem p = read_problem(root, ctx.base_dir);
  const IndexFunction phi = read_index_function(root.object("phi"));
  if (phi.family() != IndexFunction::Family::holder) throw ConfigError("phi.family: the family needs holder");
  const double R = root.positive("R");
  const std::vector<double> eps = root.numbers("epsilons");
  if (eps.empty()) throw ConfigError("epsilons: need at least one value");
  for (double e : eps)
    if (!(e > 0.0)) throw ConfigError("epsilons: must be positive");
  FamilyOptions fo;
  fo.seed = ctx.seed(root);
  fo.certify_upto = static_cast<int>(root.integer_or("certify_upto", 0));
  if (root.has("fixedpoint_tol")) fo.fixedpoint_tol = root.positive("fixedpoint_tol");
  root.finish();

  prepare_out(ctx.opt);
  bool all_hold = true;
  for (std::size_t idx = 0; idx < eps.size(); ++idx) {
    ctx.log("building family for epsilon = " + brief(eps[idx]));
    const HardFamily fam = build_hard_family(*p.op, *p.h2, p.fbar, phi, R, eps[idx], fo);
    const bool inv_g = fam.g_norms_ok(), inv_sep = fam.separation_holds(), inv_pack = fam.packing.verify(),
               inv_kl = fam.kl_chain_holds();
    Json man{{"epsilon", fam.epsilon},
             {"R", fam.R},
             {"ell", fam.ell},
             {"N", fam.N()},
             {"upsilon", fam.upsilon},
             {"C_tilde", fam.C_tilde},
             {"J", fam.J},
             {"kappa", fam.kappa},
             {"L", fam.L},
             {"gamma", fam.gamma},
             {"c_prime", fam.c_prime},
             {"decay",
              {{"alpha", fam.decay.alpha},
               {"beta", fam.decay.beta},
               {"b", fam.decay.b},
               {"certified_upto", fam.decay.certified_upto}}},
             {"g_norms", fam.g_norms},
             {"delta", fam.delta},
             {"zeta", fam.zeta},
             {"packing", fam.packing.vectors},
             {"invariants",
              {{"g_norms", inv_g}, {"separation", inv_sep}, {"packing", inv_pack}, {"kl_chain", inv_kl}}}};
    std::string pairs = "i,j,h1_gap,kl,kl_bound,chain_bound\n";
    for (std::size_t i = 0; i < fam.N(); ++i)
      for (std::size_t j = 0; j < fam.N(); ++j) {
        if (i == j) continue;
        const auto a = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(j);
        pairs += std::to_string(i) + "," + std::to_string(j) + "," + format_double(fam.pairwise_h1_gaps(a, c)) + "," +
                 format_double(fam.kl_matrix(a, c)) + "," + format_double(fam.kl_bound(a, c)) + "," +
                 format_double(fam.chain_bound(a, c)) + "\n";
      }
    const std::string stem = "family_" + std::to_string(idx);
    write_text(ctx.output(stem + ".json"), man.dump(2) + "\n");
    write_text(ctx.output(stem + "_pairs.csv"), pairs);
    const bool holds = inv_g && inv_sep && inv_pack && inv_kl;
    ctx.out << (holds ? "PASS" : "FAIL") << " epsilon " << brief(fam.epsilon) << ": ell " << fam.ell << ", N "
            << fam.N() << "\n";
    if (!holds) {
      ctx.err << "nlinv: family invariant failed for epsilon " << brief(fam.epsilon) << ":"
              << (inv_g ? "" : " g_norms") << (inv_sep ? "" : " separation") << (inv_pack ? "" : " packing")
              << (inv_kl ? "" : " kl_chain") << "\n";
      all_hold = false;
    }
  }
  return all_hold ? ok : property_failure;
}

int cmd_check(const Context& ctx) {
  if (!is_check_suite(ctx.opt.suite)) {
    ctx.err << "nlinv: unknown check suite '" << ctx.opt.suite << "' (expected effdim, hs, concentration, lowerbound, all)\n";
    return config_error;
  }
  const auto results = run_checks(ctx.opt.suite, static_cast<std::uint64_t>(ctx.opt.seed_given ? ctx.opt.seed : 0));
  int failed = 0;
  for (const CheckResult& r : results) {
    ctx.out << (r.passed ? "PASS " : "FAIL ") << r.suite << "/" << r.name << ": " << r.detail << "\n";
    if (!r.passed) {
      ++failed;
      ctx.err << "nlinv: invariant failed: " << r.suite << "/" << r.name << "\n";
    }
  }
  return failed ? property_failure : ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Tikhonov regularization for nonlinear inverse learning problems", "nlinv"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", opt.config, "JSON configuration file");
  app.add_option("--out", opt.out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", opt.seed, "seed (overrides the config)");
  app.add_option("--workers", opt.workers, "worker threads for replicates")->check(CLI::Range(1, 1024));
  app.add_flag("--verbose", opt.verbose, "progress messages on standard error");
  auto* solve = app.add_subcommand("solve", "fit one dataset");
  auto* study = app.add_subcommand("rate-study", "Monte Carlo convergence-rate study");
  auto* effdim = app.add_subcommand("effdim", "effective dimension of a kernel");
  auto* lower = app.add_subcommand("lower-bound", "hard-instance family construction");
  auto* check = app.add_subcommand("check", "property suites");
  check->add_option("suite", opt.suite, "effdim, hs, concentration, lowerbound or all")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "nlinv: " << e.what() << "\n";
    return config_error;
  }
  opt.seed_given = seed_opt->count() > 0;
  if (opt.seed_given && opt.seed < 0) {
    err << "nlinv: --seed must be non-negative\n";
    return config_error;
  }

  Context ctx{opt, out, err, opt.config.empty() ? fs::path(".") : fs::path(opt.config).parent_path()};
  try {
    if (check->parsed()) return cmd_check(ctx);
    const Json doc = load_config(opt);
    if (solve->parsed()) return cmd_solve(ctx, doc);
    if (study->parsed()) return cmd_rate_study(ctx, doc);
    if (effdim->parsed()) return cmd_effdim(ctx, doc);
    if (lower->parsed()) return cmd_lower_bound(ctx, doc);
  } catch (const ConfigError& e) {
    err << "nlinv: config error: " << e.what() << "\n";
    return config_error;
  } catch (const std::invalid_argument& e) {
    err << "nlinv: invalid input: " << e.what() << "\n";
    return config_error;
  } catch (const std::domain_error& e) {
    err << "nlinv: invalid input: " << e.what() << "\n";
    return config_error;
  } catch (const std::exception& e) {
    err << "nlinv: numerical failure: " << e.what() << "\n";
    return numerical_error;
  }
  return config_error;
}

}  // namespace nlinv::cli
