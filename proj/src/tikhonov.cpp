#include "nlinv/tikhonov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nlinv/errors.hpp"
#include "nlinv/rng.hpp"

namespace nlinv {

IndexFunction IndexFunction::holder(double r, double domain_cap) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw ArgumentError("holder index function: r must be >= 0");
  if (!(domain_cap > 0.0)) throw ArgumentError("index function: domain_cap must be positive");
  IndexFunction f;
  f.family_ = Family::holder;
  f.r_ = r;
  f.cap_ = domain_cap;
  return f;
}

IndexFunction IndexFunction::log_type(int p, double nu, double domain_cap) {
  if (p < 1) throw ArgumentError("log-type index function: p must be a positive integer");
  if (!(nu >= 0.0 && nu <= 1.0)) throw ArgumentError("log-type index function: nu must lie in [0, 1]");
  if (!(domain_cap > 0.0 && domain_cap < 1.0))
    throw ArgumentError("log-type index function: domain_cap must lie in (0, 1)");
  IndexFunction f;
  f.family_ = Family::log_type;
  f.p_ = p;
  f.nu_ = nu;
  f.cap_ = domain_cap;
  return f;
}

double IndexFunction::operator()(double t) const {
  if (t < 0.0) throw ArgumentError("index function evaluated at negative t");
  if (family_ == Family::holder) return r_ == 0.0 ? 1.0 : std::pow(t, r_);
  if (t == 0.0) return 0.0;
  if (t >= 1.0) throw DomainError("log-type index function needs t < 1");
  return std::pow(t, p_) * std::pow(std::log(1.0 / t), -nu_);
}

double IndexFunction::inverse(double v) const {
  if (!(v >= 0.0)) throw ArgumentError("index function inverse of a negative value");
  if (v == 0.0) return 0.0;
  if (family_ == Family::holder) {
    if (r_ == 0.0) throw ArgumentError("holder(0) is not invertible");
    return std::min(cap_, std::pow(v, 1.0 / r_));
  }
  if (v >= (*this)(cap_)) return cap_;
  double lo = 0.0, hi = cap_;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((*this)(mid) < v ? lo : hi) = mid;
  }
  return hi;
}

std::string IndexFunction::describe() const {
  std::ostringstream os;
  if (family_ == Family::holder)
    os << "holder(r=" << r_ << ")";
  else
    os << "log_type(p=" << p_ << ", nu=" << nu_ << ")";
  return os.str();
}

bool IndexFunction::is_index_function(int points) const {
  if ((*this)(0.0) != 0.0) return false;
  double prev = 0.0;
  for (int i = 1; i <= points; ++i) {
    double t = cap_ * i / points;
    if (family_ == Family::log_type && t >= 1.0) t = std::nextafter(1.0, 0.0);
    const double v = (*this)(t);
    if (!std::isfinite(v) || v < prev) return false;
    prev = v;
  }
  return true;
}

bool IndexFunction::upper_rate_hypotheses_hold(double lo, double hi, int points) const {
  if (!(lo > 0.0 && hi > lo && hi <= cap_)) throw ArgumentError("upper_rate_hypotheses_hold: need 0 < lo < hi <= cap");
  double prev_psi = 0.0, prev_ratio = 0.0;
  for (int i = 0; i < points; ++i) {
    const double t = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
    const double psi = (*this)(t) / std::sqrt(t);
    const double ratio = std::sqrt(t) / psi;
    const double slack = 1e-12;
    if (i > 0 && (psi < prev_psi * (1.0 - slack) || ratio < prev_ratio * (1.0 - slack))) return false;
    prev_psi = psi;
    prev_ratio = ratio;
  }
  return true;
}

double tikhonov_objective(const ForwardOp& op, const SampleSet& data, const H1Vec& f, const H1Vec& fbar,
                          double lambda, bool diagnostics) {
  data.validate();
  require_same_space(f, fbar, "tikhonov_objective");
  if (diagnostics ? !(lambda >= 0.0) : !(lambda > 0.0))
    throw ArgumentError("tikhonov_objective: lambda must be positive");
  const Vector af = op.apply(f, data.x);
  const Vector y = Eigen::Map<const Vector>(data.y.data(), static_cast<Eigen::Index>(data.y.size()));
  const H1Vec diff = f - fbar;
  return (af - y).squaredNorm() / static_cast<double>(data.m()) + lambda * inner(diff, diff);
}

namespace {

struct Problem {
  const OpDesign& design;
  const H1Space& space;
  const Vector& y;
  const Vector& fbar;
  double lambda;
  Matrix p;  // phi^T phi / m
  Vector v;  // phi^T y / m

  double objective(const Vector& f) const {
    const Vector d = f - fbar;
    return (design.apply(f) - y).squaredNorm() / static_cast<double>(y.size()) + lambda * space.inner(d, d);
  }

  // Gauss-Newton normal matrix and gradient at f.
  void normal_equations(const Vector& f, Matrix& h, Vector& g) const {
    const Vector wdiff = space.apply_gram(f - fbar);
    if (design.kind == OpKind::quadratic_integral) {
      h = 4.0 * f.asDiagonal() * p * f.asDiagonal();
      g = 2.0 * f.cwiseProduct(p * f.cwiseAbs2() - v);
    } else {
      h = p;
      g = p * f - v;
    }
    h += lambda * space.gram_form();
    g += lambda * wdiff;
  }
};

bool solve_spd(const Matrix& a, const Vector& rhs, Vector& out) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    Eigen::LDLT<Matrix> ldlt(a);
    if (ldlt.info() != Eigen::Success) return false;
    out = ldlt.solve(rhs);
  } else {
    out = llt.solve(rhs);
  }
  return out.allFinite();
}

TikhonovFit solve_from(const Problem& pr, const ForwardOp& op, const H1Vec& fbar, const Vector& start,
                       const SolveOptions& opts) {
  const H1Space& sp = pr.space;
  const Eigen::Index n = start.size();
  Vector f = start;
  double obj = pr.objective(f);
  TikhonovFit fit{H1Vec(fbar.space_ptr(), f), pr.lambda, {obj}, 0, false, 0.0, 0.0, 0.0, "", {}};
  const bool damped = opts.damping && !op.is_linear();
  double mu = -1.0;  // set on first use
  Matrix h;
  Vector g, delta;
  for (int it = 0; it < opts.max_iters; ++it) {
    pr.normal_equations(f, h, g);
    if (!solve_spd(h, -g, delta)) {
      fit.message = "singular Gauss-Newton system";
      break;
    }
    const double scale = 1.0 + std::sqrt(std::max(0.0, sp.inner(f, f)));
    fit.last_step = std::sqrt(std::max(0.0, sp.inner(delta, delta))) / scale;
    if (fit.last_step < opts.step_tol) {
      fit.converged = true;
      break;
    }
    if (mu < 0.0) mu = damped ? opts.damping_scale * (h.trace() - pr.lambda * sp.gram_form().trace()) / n : 0.0;
    const double mu_max = 1e12 * (1.0 + h.trace());
    bool accepted = false;
    while (true) {
      Vector step = delta;
      if (mu > 0.0) {
        Matrix hd = h;
        hd.diagonal().array() += mu;
        if (!solve_spd(hd, -g, step)) break;
      }
      const Vector cand = f + step;
      const double cobj = pr.objective(cand);
      if (std::isfinite(cobj) && cobj < obj) {
        f = cand;
        obj = cobj;
        accepted = true;
        if (damped) mu /= 3.0;
        break;
      }
      const double rel = std::sqrt(std::max(0.0, sp.inner(step, step))) / scale;
      if (rel < opts.step_tol) break;  // no representable decrease left
      mu = mu > 0.0 ? 10.0 * mu : std::max(1e-12, opts.damping_scale * h.trace() / n);
      if (mu > mu_max) break;
    }
    if (!accepted) {
      // Undamped model decrease below the rounding level of the objective: stationary to working precision.
      if (-0.5 * g.dot(delta) <= 1e-12 * std::abs(obj)) {
        fit.converged = true;
        fit.message = "stationary to working precision";
        break;
      }
      fit.message = "objective did not decrease after damping escalation";
      break;
    }
    fit.objective_trace.push_back(obj);
    ++fit.gn_iters;
  }
  if (!fit.converged && fit.message.empty()) fit.message = "maximum iterations reached";
  fit.solution = H1Vec(fbar.space_ptr(), f);
  const Vector d = f - pr.fbar;
  fit.h1_penalty = pr.lambda * sp.inner(d, d);
  fit.residual_norm = std::sqrt((pr.design.apply(f) - pr.y).squaredNorm() / static_cast<double>(pr.y.size()));
  return fit;
}

}  // namespace

TikhonovFit tikhonov_solve(const ForwardOp& op, const SampleSet& data, const H1Vec& fbar, double lambda,
                           const SolveOptions& opts) {
  data.validate();
  if (!(lambda > 0.0)) throw ArgumentError("tikhonov_solve: lambda must be positive");
  if (!same_grid(fbar.grid(), op.grid())) throw ShapeError("tikhonov_solve: fbar lives on a different grid");
  if (opts.max_iters < 1 || !(opts.step_tol > 0.0)) throw ArgumentError("tikhonov_solve: invalid options");
  if (op.kind() == OpKind::quadratic_integral && !(fbar.values().array() > 0.0).all())
    throw DomainError("tikhonov_solve: fbar must lie in the positive cone for the quadratic operator");
  const OpDesign design = op.design(data.x);
  const Vector y = Eigen::Map<const Vector>(data.y.data(), static_cast<Eigen::Index>(data.y.size()));
  const double m = static_cast<double>(data.m());
  Problem pr{design, fbar.space(), y, fbar.values(), lambda, design.phi.transpose() * design.phi / m,
             design.phi.transpose() * y / m};
  TikhonovFit best = solve_from(pr, op, fbar, fbar.values(), opts);
  if (opts.multistart > 0) {
    best.multistart_objectives.push_back(best.objective_trace.back());
    Rng rng(opts.multistart_seed);
    const double amp = opts.multistart_radius * std::max(1.0, fbar.values().cwiseAbs().maxCoeff());
    for (int s = 0; s < opts.multistart; ++s) {
      Vector start = fbar.values();
      for (Eigen::Index j = 0; j < start.size(); ++j) start(j) += amp * (2.0 * uniform01(rng) - 1.0);
      TikhonovFit cand = solve_from(pr, op, fbar, start, opts);
      best.multistart_objectives.push_back(cand.objective_trace.back());
      if (cand.converged && (!best.converged || cand.objective_trace.back() < best.objective_trace.back())) {
        cand.multistart_objectives = std::move(best.multistart_objectives);
        best = std::move(cand);
      }
    }
  }
  return best;
}

Vector population_linearized_solution(const Matrix& T, const Vector& u_rho, const Vector& u_bar, double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("population_linearized_solution: lambda must be positive");
  if (T.rows() != T.cols() || T.rows() != u_rho.size() || u_rho.size() != u_bar.size())
    throw ShapeError("population_linearized_solution: size mismatch");
  Matrix a = T;
  a.diagonal().array() += lambda;
  Eigen::LDLT<Matrix> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw NumericalError("population_linearized_solution: singular system");
  Vector u = ldlt.solve(T * u_rho + lambda * u_bar);
  if (!u.allFinite()) throw NumericalError("population_linearized_solution: non-finite solution");
  return u;
}

H1Vec population_linearized_solution(const Matrix& T, const H1Vec& f_rho, const H1Vec& fbar, double lambda) {
  require_same_space(f_rho, fbar, "population_linearized_solution");
  const H1Space& sp = f_rho.space();
  const Vector u = population_linearized_solution(T, sp.to_coords(f_rho.values()), sp.to_coords(fbar.values()), lambda);
  return H1Vec(f_rho.space_ptr(), sp.from_coords(u));
}

LambdaChoice lambda_choice(double m, const IndexFunction& phi, std::optional<double> b) {
  if (!(m >= 1.0)) throw ArgumentError("lambda_choice: m must be at least 1");
  if (b && !(*b > 1.0)) throw ArgumentError("lambda_choice: b must exceed 1");
  const double expo = b ? 0.5 + 0.5 / *b : 1.0;
  auto g = [&](double t) { return std::pow(t, expo) * phi(t); };
  const double target = 1.0 / std::sqrt(m);
  const double cap = phi.domain_cap();
  const double top = phi.family() == IndexFunction::Family::log_type ? g(std::nextafter(cap, 0.0)) : g(cap);
  if (target >= top) return {cap, target > top};
  // bisection in log t; g is strictly increasing
  double lo = std::log(cap) - 1.0, hi = std::log(cap);
  while (g(std::exp(lo)) > target) lo = 2.0 * lo - hi;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    (g(std::exp(mid)) < target ? lo : hi) = mid;
  }
  return {std::exp(0.5 * (lo + hi)), false};
}

RateExponents rate_exponents(double r, double b) {
  RateExponents e;
  e.r = r;
  e.b = b;
  e.h1_exponent = b * r / (2.0 * b * r + b + 1.0);
  e.prediction_exponent = b / (2.0 * b + 1.0);
  e.pphi_exponent = r / (2.0 * r + 2.0);
  e.outside_theory = r < 0.5 || r > 1.0 || !(b > 1.0);
  e.saturated = r > 1.0;
  return e;
}

bool smallness_check(double gamma, double w_norm) {
  if (gamma < 0.0 || w_norm < 0.0) throw ArgumentError("smallness_check: inputs must be nonnegative");
  return 2.0 * gamma * w_norm < 1.0;
}

}  // namespace nlinv
