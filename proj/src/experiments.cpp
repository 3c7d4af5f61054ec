#include "nlinv/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nlinv/errors.hpp"
#include "nlinv/rng.hpp"

namespace nlinv {

void run_sequential(std::size_t n, const std::function<void(std::size_t)>& job) {
  for (std::size_t i = 0; i < n; ++i) job(i);
}

NoiseMeta bernstein_certificate(NoiseModel model, double sigma) {
  if (!(sigma >= 0.0)) throw ArgumentError("noise sigma must be nonnegative");
  return NoiseMeta{model, sigma, 3.0 * sigma, 2.0 * sigma};
}

double bernstein_moment(const NoiseMeta& meta) {
  if (meta.sigma == 0.0) return 0.0;
  // e = sigma z; integrate over z >= 0 and double (symmetric law)
  const double a = meta.sigma / meta.M;
  const bool trunc = meta.model == NoiseModel::truncated_gaussian;
  const double zmax = trunc ? 3.0 : 40.0;
  const double norm = trunc ? std::erf(3.0 / std::numbers::sqrt2) : 1.0;
  const int n = 20000;  // even, Simpson
  const double h = zmax / n;
  auto integrand = [&](double z) {
    const double u = a * z;
    return (std::exp(u) - u - 1.0) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  };
  double s = integrand(0.0) + integrand(zmax);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * integrand(i * h);
  return 2.0 * s * h / 3.0 / norm;
}

bool verify_bernstein(const NoiseMeta& meta) {
  if (meta.sigma == 0.0) return true;
  return bernstein_moment(meta) <= meta.Sigma_bernstein * meta.Sigma_bernstein / (2.0 * meta.M * meta.M);
}

namespace {

double draw_noise(Rng& rng, NoiseModel model) {
  double z = standard_normal(rng);
  if (model == NoiseModel::truncated_gaussian)
    while (std::abs(z) > 3.0) z = standard_normal(rng);
  return z;
}

}  // namespace

SampleSet simulate(const ForwardOp& op, const H1Vec& f_rho, int m, double noise_sigma, std::uint64_t seed,
                   NoiseModel model) {
  if (m < 1) throw ArgumentError("simulate: m must be at least 1");
  if (!(noise_sigma >= 0.0)) throw ArgumentError("simulate: noise sigma must be nonnegative");
  Rng rng(seed);
  const Interval dom = op.grid().domain;
  SampleSet s;
  s.seed = seed;
  s.noise = bernstein_certificate(model, noise_sigma);
  s.x.resize(m);
  for (int i = 0; i < m; ++i) s.x[i] = std::min(dom.b, dom.a + dom.length() * uniform01(rng));
  const Vector clean = op.apply(f_rho, s.x);
  s.y.resize(m);
  for (int i = 0; i < m; ++i) s.y[i] = clean(i) + (noise_sigma > 0.0 ? noise_sigma * draw_noise(rng, model) : 0.0);
  return s;
}

std::string to_string(GProfile p) { return p == GProfile::spectral ? "spectral" : "isotropic"; }

GProfile g_profile_from_string(const std::string& s) {
  if (s == "spectral") return GProfile::spectral;
  if (s == "isotropic") return GProfile::isotropic;
  throw ArgumentError("unknown g profile '" + s + "'");
}

Matrix apply_index_function(const Matrix& T, const IndexFunction& phi) {
  // log-type functions are only defined below domain_cap < 1; holder functions need no clamp
  const bool clamp = phi.family() == IndexFunction::Family::log_type;
  return spectral_apply(T, [&](double t) {
    t = std::max(0.0, t);
    return phi(clamp ? std::min(t, std::nextafter(phi.domain_cap(), 0.0)) : t);
  });
}

namespace {

// psi(t) = phi(t) / sqrt(t), continued to t = 0.
double psi_value(const IndexFunction& phi, double t) {
  if (t > 0.0) {
    if (phi.family() == IndexFunction::Family::log_type) t = std::min(t, std::nextafter(phi.domain_cap(), 0.0));
    return phi(t) / std::sqrt(t);
  }
  if (phi.family() == IndexFunction::Family::log_type) return 0.0;
  if (phi.r() > 0.5) return 0.0;
  if (phi.r() == 0.5) return 1.0;
  return std::numeric_limits<double>::infinity();
}

}  // namespace

SourceTruth source_fixed_point(const ForwardOp& op, const H1Vec& fbar, const IndexFunction& phi, const H1Vec& g,
                               double tol, int max_iters) {
  require_same_space(fbar, g, "source_fixed_point");
  if (!(tol > 0.0) || max_iters < 1) throw ArgumentError("source_fixed_point: invalid tolerance or iteration cap");
  const H1Space& sp = fbar.space();
  const Vector ug = sp.to_coords(g.values());
  Vector f = fbar.values();
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= max_iters; ++k) {
    const Matrix t = population_T(op, H1Vec(fbar.space_ptr(), f));
    const Vector fnew = fbar.values() + sp.from_coords(apply_index_function(t, phi) * ug);
    const double res = std::sqrt(std::max(0.0, sp.inner(fnew - f, fnew - f)));
    if (!std::isfinite(res)) throw ConstructionError("source fixed point: non-finite iterate");
    if (res < tol) {
      SourceTruth out{H1Vec(fbar.space_ptr(), f), g, norm(g), 0, k, res, 0.0, true};
      const SymEig e = sym_eig(t);
      Vector c = e.vectors.transpose() * ug;
      for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= psi_value(phi, e.values(i));
      out.w_norm = c.norm();
      out.positive_cone = (f.array() > 0.0).all();
      return out;
    }
    if (k >= 1 && res >= prev) {
      std::ostringstream os;
      os << "source fixed point is not contracting (residual " << res << " after " << k << " iterations)";
      throw ConstructionError(os.str());
    }
    prev = res;
    f = fnew;
  }
  throw ConstructionError("source fixed point did not reach the tolerance");
}

SourceTruth build_source_truth(const ForwardOp& op, const H1Vec& fbar, const SourceSpec& spec) {
  if (!(spec.R > 0.0) || !(spec.g_norm > 0.0) || spec.g_norm > spec.R)
    throw ArgumentError("source spec: need 0 < g_norm <= R");
  if (!same_grid(fbar.grid(), op.grid())) throw ShapeError("build_source_truth: grid mismatch");
  const H1Space& sp = fbar.space();
  const Eigen::Index n = fbar.size();
  Rng rng(spec.g_seed);
  Vector u(n);
  if (spec.profile == GProfile::spectral) {
    const SymEig e = sym_eig(population_T(op, fbar));
    Vector c(n);
    for (Eigen::Index k = 0; k < n; ++k)
      c(k) = (uniform01(rng) < 0.5 ? -1.0 : 1.0) / std::sqrt(static_cast<double>(k + 1));
    u = e.vectors * c;
  } else {
    for (Eigen::Index k = 0; k < n; ++k) u(k) = standard_normal(rng);
  }
  u /= u.norm();
  std::string last;
  for (int h = 0; h <= 10; ++h) {
    const double gn = spec.g_norm * std::ldexp(1.0, -h);
    const H1Vec g(fbar.space_ptr(), sp.from_coords(gn * u));
    try {
      SourceTruth t = source_fixed_point(op, fbar, spec.phi, g, spec.fixedpoint_tol, spec.fixedpoint_iters);
      if (op.kind() == OpKind::quadratic_integral && !t.positive_cone)
        throw ConstructionError("fixed point left the positive cone");
      t.g_norm = gn;
      t.halvings = h;
      return t;
    } catch (const ConstructionError& e) {
      last = e.what();
    }
  }
  throw ConstructionError("no contraction after halving g_norm 10 times: " + last);
}

std::string to_string(LambdaRule r) {
  switch (r) {
    case LambdaRule::theta_rule:
      return "theta_rule";
    case LambdaRule::psi_rule:
      return "psi_rule";
    case LambdaRule::fixed_grid:
      return "fixed_grid";
  }
  return "unknown";
}

LambdaRule lambda_rule_from_string(const std::string& s) {
  if (s == "theta_rule") return LambdaRule::theta_rule;
  if (s == "psi_rule") return LambdaRule::psi_rule;
  if (s == "fixed_grid") return LambdaRule::fixed_grid;
  throw ArgumentError("unknown lambda rule '" + s + "'");
}

void RateStudyConfig::validate() const {
  if (ms.size() < 2) throw ArgumentError("rate study: ms needs at least 2 entries");
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (ms[i] < 1) throw ArgumentError("rate study: ms entries must be positive");
    if (i > 0 && ms[i] <= ms[i - 1]) throw ArgumentError("rate study: ms must be increasing");
  }
  if (replicates < 3) throw ArgumentError("rate study: replicates must be at least 3");
  if (!(noise_sigma >= 0.0)) throw ArgumentError("rate study: noise_sigma must be nonnegative");
  if (b && !(*b > 1.0)) throw ArgumentError("rate study: b must exceed 1");
  if (!(R > 0.0)) throw ArgumentError("rate study: R must be positive");
  if (!(eta > 0.0 && eta < 1.0)) throw ArgumentError("rate study: eta must lie in (0, 1)");
  if (phi.family() != IndexFunction::Family::holder)
    throw ArgumentError("rate study: theoretical exponents need a holder index function");
  if (lambda_rule == LambdaRule::fixed_grid) {
    if (fixed_lambdas.size() != ms.size()) throw ArgumentError("rate study: fixed_grid needs one lambda per m");
    for (double l : fixed_lambdas)
      if (!(l > 0.0)) throw ArgumentError("rate study: fixed lambdas must be positive");
  }
}

LambdaChoice study_lambda(const RateStudyConfig& cfg, int m, double b, std::size_t m_index) {
  switch (cfg.lambda_rule) {
    case LambdaRule::theta_rule:
      return lambda_choice(m, cfg.phi);
    case LambdaRule::psi_rule:
      return lambda_choice(m, cfg.phi, b);
    case LambdaRule::fixed_grid:
      return {cfg.fixed_lambdas.at(m_index), false};
  }
  throw ArgumentError("unknown lambda rule");
}

double kernel_decay_exponent(const H2Space& h2) { return estimate_decay(h2.gram(), h2.grid().weights).fitted_b; }

bool neighborhood_condition_check(double m, double lambda, double kappa, double L, double M, double Sigma, double d,
                                  double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw ArgumentError("neighborhood_condition_check: eta must lie in (0, 1)");
  if (!(kappa > 0.0) || !(d > 0.0) || m < 0.0 || lambda < 0.0 || L < 0.0 || M < 0.0 || Sigma < 0.0)
    throw ArgumentError("neighborhood_condition_check: invalid inputs");
  const double lhs = 8.0 * kappa * kappa * std::max(1.0, L * (M + Sigma) / (kappa * d)) * std::log(4.0 / eta);
  return lhs <= std::sqrt(m) * lambda;
}

double prediction_error(const ForwardOp& op, const H1Vec& f, const H1Vec& g) {
  require_same_space(f, g, "prediction_error");
  const Vector pw = op.grid().probability_weights();
  const Vector diff = op.node_design().apply(f.values()) - op.node_design().apply(g.values());
  return std::sqrt((pw.array() * diff.array().square()).sum());
}

RateStudyResult run_rate_study(const RateStudyConfig& cfg, const ForwardOp& op, const H2Space& h2,
                               const H1Vec& fbar, const H1Vec& f_rho, const Executor& exec) {
  cfg.validate();
  require_same_space(fbar, f_rho, "run_rate_study");
  RateStudyResult res;
  res.ms = cfg.ms;
  res.b = cfg.b ? *cfg.b : kernel_decay_exponent(h2);
  res.exponents = rate_exponents(cfg.phi.r(), res.b);
  res.theoretical_h1 = -res.exponents.h1_exponent;
  res.theoretical_pred = -res.exponents.prediction_exponent;

  const double kap = h2.kappa();
  const double L = derivative_norm_h2(op, h2, f_rho);
  const double d = op.ball_radius_d.value_or(1.0);
  const NoiseMeta meta = bernstein_certificate(cfg.noise_model, cfg.noise_sigma);
  const Vector pw = op.grid().probability_weights();
  const Vector a_rho = op.node_design().apply(f_rho.values());

  const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
  res.rows.resize(cfg.ms.size() * reps);
  exec(res.rows.size(), [&](std::size_t idx) {
    const std::size_t mi = idx / reps;
    const int m = cfg.ms[mi];
    RateStudyRow& row = res.rows[idx];
    row.m = m;
    row.replicate = static_cast<int>(idx % reps);
    row.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(row.replicate));
    const auto t0 = std::chrono::steady_clock::now();
    const SampleSet data = simulate(op, f_rho, m, cfg.noise_sigma, row.seed, cfg.noise_model);
    row.lambda = study_lambda(cfg, m, res.b, mi).lambda;
    try {
      const TikhonovFit fit = tikhonov_solve(op, data, fbar, row.lambda, cfg.solve);
      row.converged = fit.converged;
      row.gn_iters = fit.gn_iters;
      row.err_h1 = norm(fit.solution - f_rho);
      const Vector diff = op.node_design().apply(fit.solution.values()) - a_rho;
      row.err_pred = std::sqrt((pw.array() * diff.array().square()).sum());
    } catch (const NumericalError&) {
      row.converged = false;
    }
    row.condition_held = neighborhood_condition_check(m, row.lambda, kap, L, meta.M, meta.Sigma_bernstein, d, cfg.eta);
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });

  for (const auto& r : res.rows) res.failures += r.converged ? 0 : 1;
  if (res.failures * 5 > static_cast<int>(res.rows.size())) {
    std::ostringstream os;
    os << "rate study: " << res.failures << " of " << res.rows.size() << " replicates failed to converge";
    throw RateStudyError(os.str());
  }

  std::vector<double> xs, regime_x, regime_y;
  for (std::size_t mi = 0; mi < cfg.ms.size(); ++mi) {
    std::vector<double> e1, e2, eh;
    for (std::size_t r = 0; r < reps; ++r) {
      const RateStudyRow& row = res.rows[mi * reps + r];
      if (!row.converged) continue;
      e1.push_back(row.err_h1);
      e2.push_back(row.err_pred);
      if (row.condition_held) eh.push_back(row.err_h1);
    }
    if (e1.empty()) throw RateStudyError("rate study: no converged replicate for some m");
    xs.push_back(cfg.ms[mi]);
    res.median_h1.push_back(median(e1));
    res.median_pred.push_back(median(e2));
    if (!eh.empty()) {
      regime_x.push_back(cfg.ms[mi]);
      regime_y.push_back(median(eh));
    }
  }
  const LineFit f1 = fit_loglog(xs, res.median_h1);
  const LineFit f2 = fit_loglog(xs, res.median_pred);
  res.fitted_slope_h1 = f1.slope;
  res.slope_stderr = f1.slope_stderr;
  res.fitted_slope_pred = f2.slope;
  res.slope_stderr_pred = f2.slope_stderr;
  res.regime_ms = static_cast<int>(regime_x.size());
  if (regime_x.size() >= 4) res.regime_slope_h1 = fit_loglog(regime_x, regime_y).slope;
  return res;
}

std::string to_string(Summand s) {
  switch (s) {
    case Summand::deterministic:
      return "deterministic";
    case Summand::scalar_gaussian:
      return "scalar_gaussian";
    case Summand::kernel_noise:
      return "kernel_noise";
    case Summand::whitened_noise:
      return "whitened_noise";
    case Summand::covariance:
      return "covariance";
  }
  return "unknown";
}

Summand summand_from_string(const std::string& s) {
  for (Summand v : {Summand::deterministic, Summand::scalar_gaussian, Summand::kernel_noise, Summand::whitened_noise,
                    Summand::covariance})
    if (to_string(v) == s) return v;
  throw ArgumentError("unknown summand '" + s + "'");
}

double ConcentrationReport::slack(std::size_t i) const {
  const double e = eta_grid.at(i);
  return 2.0 * std::sqrt(e * (1.0 - e) / trials);
}

bool ConcentrationReport::holds() const {
  for (std::size_t i = 0; i < eta_grid.size(); ++i)
    if (empirical_tail_freq[i] > eta_grid[i] + slack(i)) return false;
  return true;
}

namespace {

double draw_point(Rng& rng, const Interval& d) { return std::min(d.b, d.a + d.length() * uniform01(rng)); }

// ||S_x^* S_x - L_K||_HS for kernel sections in H2, with the design expectations tabulated.
class CovarianceDeviation {
 public:
  CovarianceDeviation(const Kernel& k, int nodes) : k_(k) {
    const Interval d = k.domain();
    const int n = std::max(nodes, 2) * 16 + 1;
    step_ = d.length() / (n - 1);
    Vector x(n), w(n);
    for (int i = 0; i < n; ++i) {
      x(i) = i == n - 1 ? d.b : d.a + i * step_;
      w(i) = (i == 0 || i == n - 1 ? 0.5 : 1.0) / (n - 1);
    }
    h_.resize(n);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        const double v = k.eval_unchecked(x(i), x(j));
        s += w(j) * v * v;
      }
      h_(i) = s;
    }
    c0_ = w.dot(h_);
  }

  double operator()(const std::vector<double>& x) const {
    const std::size_t m = x.size();
    double s = 0.0, e = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double kii = k_.eval_unchecked(x[i], x[i]);
      s += kii * kii;
      for (std::size_t j = 0; j < i; ++j) {
        const double v = k_.eval_unchecked(x[i], x[j]);
        s += 2.0 * v * v;
      }
      e += table(x[i]);
    }
    const double md = static_cast<double>(m);
    return std::sqrt(std::max(0.0, s / (md * md) - 2.0 * e / md + c0_));
  }

 private:
  double table(double x) const {
    const double u = (x - k_.domain().a) / step_;
    const Eigen::Index i = std::min<Eigen::Index>(static_cast<Eigen::Index>(u), h_.size() - 2);
    const double t = u - i;
    return (1.0 - t) * h_(i) + t * h_(i + 1);
  }

  const Kernel& k_;
  double step_ = 0.0;
  Vector h_;
  double c0_ = 0.0;
};

}  // namespace

ConcentrationReport pinelis_tail_check(const ConcentrationConfig& cfg, const Kernel* k) {
  if (cfg.trials < 1000) throw ArgumentError("pinelis_tail_check: need at least 1000 trials");
  if (cfg.m < 1) throw ArgumentError("pinelis_tail_check: m must be at least 1");
  if (!(cfg.sigma > 0.0)) throw ArgumentError("pinelis_tail_check: sigma must be positive");
  for (double e : cfg.eta_grid)
    if (!(e > 0.0 && e < 1.0)) throw ArgumentError("pinelis_tail_check: eta must lie in (0, 1)");
  const bool needs_kernel = cfg.summand != Summand::deterministic && cfg.summand != Summand::scalar_gaussian;
  if (needs_kernel && k == nullptr) throw ArgumentError("pinelis_tail_check: summand needs a kernel");

  ConcentrationReport rep;
  rep.summand = cfg.summand;
  rep.m = cfg.m;
  rep.trials = cfg.trials;
  rep.eta_grid = cfg.eta_grid;
  rep.deviations.assign(cfg.trials, 0.0);
  Rng rng(cfg.seed);
  const int m = cfg.m;
  const double md = m;
  const NoiseMeta noise = bernstein_certificate(NoiseModel::gaussian, cfg.sigma);
  std::vector<double> x(m), e(m);

  double kap = 0.0;
  GridPtr grid;
  if (needs_kernel) {
    grid = make_trapezoid_grid(k->domain(), cfg.quad_nodes, true);
    kap = kappa(*k, grid->node_span());
  }

  switch (cfg.summand) {
    case Summand::deterministic: {
      const double c = 1.0;
      for (int t = 0; t < cfg.trials; ++t) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += c;
        rep.deviations[t] = std::abs(s / md - c);
      }
      break;
    }
    case Summand::scalar_gaussian: {
      rep.Q = noise.M;
      rep.S = noise.Sigma_bernstein;
      for (int t = 0; t < cfg.trials; ++t) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += cfg.sigma * standard_normal(rng);
        rep.deviations[t] = std::abs(s / md);
      }
      break;
    }
    case Summand::kernel_noise: {
      rep.Q = kap * noise.M;
      rep.S = kap * noise.Sigma_bernstein;
      for (int t = 0; t < cfg.trials; ++t) {
        for (int i = 0; i < m; ++i) x[i] = draw_point(rng, k->domain());
        for (int i = 0; i < m; ++i) e[i] = cfg.sigma * standard_normal(rng);
        double s = 0.0;
        for (int i = 0; i < m; ++i) {
          s += e[i] * e[i] * k->eval_unchecked(x[i], x[i]);
          for (int j = 0; j < i; ++j) s += 2.0 * e[i] * e[j] * k->eval_unchecked(x[i], x[j]);
        }
        rep.deviations[t] = std::sqrt(std::max(0.0, s)) / md;
      }
      break;
    }
    case Summand::whitened_noise: {
      if (!(cfg.lambda > 0.0)) throw ArgumentError("pinelis_tail_check: lambda must be positive");
      const Grid& g = *grid;
      const SymEig eig = sym_eig(empirical_covariance(*k, g));
      Eigen::Index keep = 0;
      while (keep < eig.values.size() && eig.values(keep) > 1e-10 * eig.values(0)) ++keep;
      const Vector tk = eig.values.head(keep);
      // <h, e_k>_H2 = (V^T (sqrt(w) .* h))_k / sqrt(t_k) with h_j = (1/m) sum_i e_i K(x_i, s_j)
      const Matrix proj = eig.vectors.leftCols(keep).transpose() * g.weights.cwiseSqrt().asDiagonal();
      Vector wk(keep);
      for (Eigen::Index i = 0; i < keep; ++i) wk(i) = 1.0 / (tk(i) * (tk(i) + cfg.lambda));
      const double neff = effective_dimension(tk, cfg.lambda).value;
      rep.Q = kap * noise.M / std::sqrt(cfg.lambda);
      rep.S = noise.Sigma_bernstein * std::sqrt(neff);
      Vector h(g.size());
      for (int t = 0; t < cfg.trials; ++t) {
        for (int i = 0; i < m; ++i) x[i] = draw_point(rng, k->domain());
        for (int i = 0; i < m; ++i) e[i] = cfg.sigma * standard_normal(rng);
        h.setZero();
        for (int i = 0; i < m; ++i)
          for (Eigen::Index j = 0; j < g.size(); ++j) h(j) += e[i] * k->eval_unchecked(x[i], g.nodes(j));
        h /= md;
        const Vector c = proj * h;
        rep.deviations[t] = std::sqrt((wk.array() * c.array().square()).sum());
      }
      break;
    }
    case Summand::covariance: {
      rep.Q = kap * kap;
      rep.S = kap * kap;
      const CovarianceDeviation dev(*k, cfg.quad_nodes);
      for (int t = 0; t < cfg.trials; ++t) {
        for (int i = 0; i < m; ++i) x[i] = draw_point(rng, k->domain());
        rep.deviations[t] = dev(x);
      }
      break;
    }
  }

  std::sort(rep.deviations.begin(), rep.deviations.end());
  for (double eta : cfg.eta_grid) {
    const double bound = 2.0 * (rep.Q / md + rep.S / std::sqrt(md)) * std::log(2.0 / eta);
    const auto above = rep.deviations.end() - std::upper_bound(rep.deviations.begin(), rep.deviations.end(), bound);
    rep.bound_values.push_back(bound);
    rep.empirical_tail_freq.push_back(static_cast<double>(above) / cfg.trials);
  }
  return rep;
}

CovarianceEventReport covariance_event_check(const Kernel& k, int m, double eta, int trials, std::uint64_t seed,
                                             int quad_nodes) {
  if (m < 1 || trials < 1 || !(eta > 0.0 && eta < 1.0)) throw ArgumentError("covariance_event_check: invalid inputs");
  const GridPtr grid = make_trapezoid_grid(k.domain(), quad_nodes, true);
  const double kap = kappa(k, grid->node_span());
  CovarianceEventReport rep;
  rep.m = m;
  rep.trials = trials;
  rep.eta = eta;
  rep.lambda = 8.0 * kap * kap * std::log(4.0 / eta) / std::sqrt(static_cast<double>(m));
  const CovarianceDeviation dev(k, quad_nodes);
  Rng rng(seed);
  std::vector<double> x(m);
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    for (int i = 0; i < m; ++i) x[i] = draw_point(rng, k.domain());
    hits += dev(x) > rep.lambda / 2.0 ? 1 : 0;
  }
  rep.frequency = static_cast<double>(hits) / trials;
  const double p = eta / 2.0;
  rep.allowed = p + 2.0 * std::sqrt(p * (1.0 - p) / trials);
  return rep;
}

}  // namespace nlinv
