#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlinv/hilbert.hpp"
#include "nlinv/operators.hpp"

namespace nlinv {

// Index function phi: holder t^r, or log type t^p * log(1/t)^-nu (requires domain_cap < 1).
class IndexFunction {
 public:
  enum class Family { holder, log_type };

  static IndexFunction holder(double r, double domain_cap = 1.0);
  static IndexFunction log_type(int p, double nu, double domain_cap);

  double operator()(double t) const;
  // Smallest t in [0, domain_cap] with phi(t) >= v; bisection unless closed form exists.
  double inverse(double v) const;

  Family family() const { return family_; }
  double r() const { return r_; }
  int p() const { return p_; }
  double nu() const { return nu_; }
  double domain_cap() const { return cap_; }
  std::string describe() const;

  // phi(0) = 0 and phi nondecreasing on a uniform grid of [0, domain_cap].
  bool is_index_function(int points = 1000) const;
  // psi(t) = phi(t)/sqrt(t) and sqrt(t)/psi(t) nondecreasing on a log grid of [lo, hi].
  bool upper_rate_hypotheses_hold(double lo, double hi, int points = 1000) const;

 private:
  Family family_ = Family::holder;
  double r_ = 0.5;
  int p_ = 1;
  double nu_ = 0.0;
  double cap_ = 1.0;
};

double tikhonov_objective(const ForwardOp& op, const SampleSet& data, const H1Vec& f, const H1Vec& fbar,
                          double lambda, bool diagnostics = false);

struct SolveOptions {
  int max_iters = 100;
  double step_tol = 1e-9;  // on ||delta||_{H1} / (1 + ||f||_{H1})
  bool damping = true;     // Levenberg damping for nonlinear operators
  double damping_scale = 1e-3;
  int multistart = 0;  // extra perturbed starts, best objective wins
  double multistart_radius = 0.1;
  std::uint64_t multistart_seed = 0;
};

struct TikhonovFit {
  H1Vec solution;
  double lambda = 0.0;
  std::vector<double> objective_trace;  // initial value, then one entry per accepted step
  int gn_iters = 0;
  bool converged = false;
  double residual_norm = 0.0;  // sqrt of the mean squared residual
  double h1_penalty = 0.0;     // lambda * ||f - fbar||^2
  double last_step = 0.0;      // relative size of the last Gauss-Newton step
  std::string message;
  std::vector<double> multistart_objectives;
};

TikhonovFit tikhonov_solve(const ForwardOp& op, const SampleSet& data, const H1Vec& fbar, double lambda,
                           const SolveOptions& opts = {});

// (T + lambda)^-1 (T u_rho + lambda u_bar) on orthonormal coordinates.
Vector population_linearized_solution(const Matrix& T, const Vector& u_rho, const Vector& u_bar, double lambda);
// Same for H1 vectors; T is given in the H1-orthonormal coordinates of their space.
H1Vec population_linearized_solution(const Matrix& T, const H1Vec& f_rho, const H1Vec& fbar, double lambda);

struct LambdaChoice {
  double lambda = 0.0;
  bool saturated = false;  // target above Theta(domain_cap); lambda = domain_cap
};

// lambda = Theta^-1(m^-1/2), Theta(t) = t phi(t), or Psi^-1 with Psi(t) = t^{1/2 + 1/(2b)} phi(t) when b is given.
LambdaChoice lambda_choice(double m, const IndexFunction& phi, std::optional<double> b = std::nullopt);

struct RateExponents {
  double r = 0.0;
  double b = 0.0;
  double h1_exponent = 0.0;          // br / (2br + b + 1)
  double prediction_exponent = 0.0;  // b / (2b + 1)
  double pphi_exponent = 0.0;        // r / (2r + 2)
  bool outside_theory = false;       // r outside [1/2, 1] or b <= 1
  bool saturated = false;            // r > 1
};

RateExponents rate_exponents(double r, double b);

bool smallness_check(double gamma, double w_norm);

}  // namespace nlinv
