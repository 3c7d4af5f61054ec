#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nlinv/hilbert.hpp"
#include "nlinv/operators.hpp"
#include "nlinv/tikhonov.hpp"

namespace nlinv {

// Runs job(i) for i in [0, n). Implementations may run jobs concurrently.
using Executor = std::function<void(std::size_t n, const std::function<void(std::size_t)>& job)>;
void run_sequential(std::size_t n, const std::function<void(std::size_t)>& job);

// Bernstein constants M = 3 sigma, Sigma = 2 sigma for centered Gaussian noise
// (truncated_gaussian: clipped at 3 sigma by rejection).
NoiseMeta bernstein_certificate(NoiseModel model, double sigma);
// E[exp(|e|/M) - |e|/M - 1] for the noise law, by quadrature; compare with Sigma^2 / (2 M^2).
double bernstein_moment(const NoiseMeta& meta);
bool verify_bernstein(const NoiseMeta& meta);

SampleSet simulate(const ForwardOp& op, const H1Vec& f_rho, int m, double noise_sigma, std::uint64_t seed,
                   NoiseModel model = NoiseModel::gaussian);

// Profile of the source element g. spectral: coefficients n^{-1/2} with random signs in the
// eigenbasis of T at fbar; isotropic: i.i.d. standard normal coordinates.
enum class GProfile { spectral, isotropic };
std::string to_string(GProfile p);
GProfile g_profile_from_string(const std::string& s);

struct SourceSpec {
  IndexFunction phi = IndexFunction::holder(0.5);
  double R = 1.0;
  std::uint64_t g_seed = 0;
  double g_norm = 0.2;
  double fixedpoint_tol = 1e-10;
  int fixedpoint_iters = 200;
  GProfile profile = GProfile::spectral;
};

struct SourceTruth {
  H1Vec f_rho;
  H1Vec g;
  double g_norm = 0.0;  // after any halving
  int halvings = 0;
  int iterations = 0;
  double residual = 0.0;  // ||f - (fbar + phi(T_f) g)||
  double w_norm = 0.0;    // ||psi(T) g|| with psi(t) = phi(t)/sqrt(t)
  bool positive_cone = true;
};

// Iterates f <- fbar + phi(T_f) g for a fixed g. Throws ConstructionError if it stops contracting.
SourceTruth source_fixed_point(const ForwardOp& op, const H1Vec& fbar, const IndexFunction& phi, const H1Vec& g,
                               double tol, int max_iters);

// Draws g from the spec and runs the fixed point, halving ||g|| (up to 10 times) until it contracts.
SourceTruth build_source_truth(const ForwardOp& op, const H1Vec& fbar, const SourceSpec& spec);

// phi(T) for symmetric PSD T in orthonormal coordinates.
Matrix apply_index_function(const Matrix& T, const IndexFunction& phi);

enum class LambdaRule { theta_rule, psi_rule, fixed_grid };
std::string to_string(LambdaRule r);
LambdaRule lambda_rule_from_string(const std::string& s);

struct RateStudyConfig {
  std::vector<int> ms;
  int replicates = 20;
  double noise_sigma = 0.1;
  NoiseModel noise_model = NoiseModel::gaussian;
  IndexFunction phi = IndexFunction::holder(0.5);
  std::optional<double> b;  // estimated from the kernel spectrum when absent
  double R = 1.0;
  std::uint64_t seed = 0;
  LambdaRule lambda_rule = LambdaRule::psi_rule;
  std::vector<double> fixed_lambdas;  // one per m for fixed_grid
  double eta = 0.1;                   // confidence level used for the regime flag
  SolveOptions solve;

  void validate() const;
};

struct RateStudyRow {
  int m = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  double err_h1 = 0.0;
  double err_pred = 0.0;
  bool converged = false;
  int gn_iters = 0;
  bool condition_held = false;
  double seconds = 0.0;  // wall clock; not part of the deterministic output
};

struct RateStudyResult {
  std::vector<RateStudyRow> rows;  // ordered by (m, replicate)
  std::vector<int> ms;
  std::vector<double> median_h1, median_pred;
  double fitted_slope_h1 = 0.0;
  double fitted_slope_pred = 0.0;
  double theoretical_h1 = 0.0;    // negative exponent
  double theoretical_pred = 0.0;  // negative exponent
  double slope_stderr = 0.0;
  double slope_stderr_pred = 0.0;
  double b = 0.0;  // decay exponent used by the lambda rule
  int failures = 0;
  int regime_ms = 0;  // number of m values with at least one cell inside the neighborhood regime
  std::optional<double> regime_slope_h1;  // fit restricted to those cells when they span >= 4 values of m
  RateExponents exponents;
};

class RateStudyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lambda for sample size m under the configured rule.
LambdaChoice study_lambda(const RateStudyConfig& cfg, int m, double b, std::size_t m_index);

RateStudyResult run_rate_study(const RateStudyConfig& cfg, const ForwardOp& op, const H2Space& h2,
                               const H1Vec& fbar, const H1Vec& f_rho, const Executor& exec = run_sequential);

// ||A(f) - A(g)||_{L2(rho_X)} by quadrature on the grid.
double prediction_error(const ForwardOp& op, const H1Vec& f, const H1Vec& g);

// Decay exponent of the kernel integral operator on the grid of h2.
double kernel_decay_exponent(const H2Space& h2);

bool neighborhood_condition_check(double m, double lambda, double kappa, double L, double M, double Sigma, double d,
                                  double eta);

// Summands for the concentration checks.
enum class Summand {
  deterministic,    // xi = const
  scalar_gaussian,  // xi = e ~ N(0, sigma^2); Q = 3 sigma, S = 2 sigma
  kernel_noise,     // xi = K_x e in H2; Q = kappa M, S = kappa Sigma
  whitened_noise,   // xi = (L_K + lambda)^{-1/2} K_x e; Q = kappa M / sqrt(lambda), S = Sigma sqrt(N(lambda))
  covariance,       // xi = K_x (x) K_x in HS(H2); Q = S = kappa^2
};
std::string to_string(Summand s);
Summand summand_from_string(const std::string& s);

struct ConcentrationConfig {
  Summand summand = Summand::scalar_gaussian;
  int trials = 10000;
  int m = 100;
  std::vector<double> eta_grid{0.3, 0.1, 0.03};
  double sigma = 1.0;
  double lambda = 0.1;  // whitened summand only
  int quad_nodes = 256;
  std::uint64_t seed = 0;
};

struct ConcentrationReport {
  Summand summand = Summand::scalar_gaussian;
  int m = 0;
  int trials = 0;
  double Q = 0.0;
  double S = 0.0;
  std::vector<double> eta_grid;
  std::vector<double> empirical_tail_freq;
  std::vector<double> bound_values;
  std::vector<double> deviations;  // per trial, sorted ascending

  double slack(std::size_t i) const;
  bool holds() const;
};

// Pinelis-Sakhanenko tail check for the configured summand; kernel required except for scalar summands.
ConcentrationReport pinelis_tail_check(const ConcentrationConfig& cfg, const Kernel* k = nullptr);

struct CovarianceEventReport {
  int m = 0;
  int trials = 0;
  double eta = 0.0;
  double lambda = 0.0;  // smallest lambda satisfying 8 kappa^2 log(4/eta) <= sqrt(m) lambda
  double frequency = 0.0;  // of ||S_x^* S_x - L_K||_HS > lambda / 2
  double allowed = 0.0;    // eta / 2 + binomial slack
  bool holds() const { return frequency <= allowed; }
};

CovarianceEventReport covariance_event_check(const Kernel& k, int m, double eta, int trials, std::uint64_t seed,
                                             int quad_nodes = 256);

}  // namespace nlinv
