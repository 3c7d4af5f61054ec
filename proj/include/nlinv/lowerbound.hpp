#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "nlinv/errors.hpp"
#include "nlinv/experiments.hpp"
#include "nlinv/hilbert.hpp"
#include "nlinv/operators.hpp"
#include "nlinv/rng.hpp"
#include "nlinv/tikhonov.hpp"

namespace nlinv {

// Two-atom law per grid node: y = +dJ with probability b(x) / (2dJ), y = -dJ with a(x) / (2dJ),
// a = J - A(f)(x), b = J + A(f)(x).
struct HardInstance {
  H1Vec f;
  double J = 0.0;
  int d = 1;
  Vector image;    // A(f) at the grid nodes
  Vector p_plus;   // P(y = +dJ | x)
  Vector p_minus;  // P(y = -dJ | x)
  double M_cert = 0.0;
  double Sigma_cert = 0.0;

  // Closed-form conditional mean sum_atoms y p(y | x) at every node.
  Vector conditional_mean() const;
  double sample_y(Eigen::Index node, Rng& rng) const;
};

// J = 4 kappa ||A(f)||_{H2} unless a (family-shared) J is supplied. Only d = 1 is supported.
HardInstance build_hard_instance(const ForwardOp& op, const H2Space& h2, const H1Vec& f, int d = 1,
                                 std::optional<double> shared_J = std::nullopt);

class PackingError : public ConstructionError {
 public:
  using ConstructionError::ConstructionError;
};

struct SignPacking {
  int ell = 0;
  std::vector<std::vector<int>> vectors;  // entries +-1

  std::size_t count() const { return vectors.size(); }
  // Squared Euclidean distances between all pairs.
  Matrix distances() const;
  // Exhaustive check of the separation and cardinality requirements.
  bool verify() const;
};

std::size_t required_packing_size(int ell);

SignPacking pack_signs(int ell, std::uint64_t seed, long max_draws = 1000000);

// Sum over x of nu(x) KL(p(. | x) || q(. | x)); +infinity when q misses an atom charged by p.
double discrete_kl(const HardInstance& p, const HardInstance& q, const Grid& grid);
// KL between two discrete laws on the same atoms.
double discrete_kl(const Vector& p, const Vector& q);

struct DecayBounds {
  double alpha = 0.0;  // alpha n^-b <= t_n
  double beta = 0.0;   // t_n <= beta n^-b
  double b = 0.0;
  int certified_upto = 0;  // bounds hold for n = 1..certified_upto
};

// Two-sided bounds on a descending spectrum over n = 1..upto with b fitted by least squares.
DecayBounds certify_decay(const Vector& eigenvalues, int upto);

struct FamilyOptions {
  std::uint64_t seed = 0;
  std::optional<DecayBounds> decay;  // certified on the spectrum of T at fbar when absent
  int certify_upto = 0;              // default: half the grid size
  double fixedpoint_tol = 1e-12;
  int fixedpoint_iters = 200;
};

struct HardFamily {
  double epsilon = 0.0;
  double R = 0.0;
  int ell = 0;
  DecayBounds decay;
  SignPacking packing;
  std::vector<HardInstance> instances;
  std::vector<double> g_norms;
  std::vector<double> delta;  // ||phi(T_i) g_i - phi(Tbar) g_i|| / ||phi(Tbar) g_i||
  std::vector<double> zeta;   // delta_i / ||f_i - fbar||
  Matrix pairwise_h1_gaps;
  Matrix kl_matrix;
  Matrix kl_bound;     // 16 / (15 d J^2) ||A(f_i) - A(f_j)||^2_{L2(nu)}
  Matrix chain_bound;  // C_ij (eps^2 / ell^b + eps^4)
  double upsilon = 1.0;
  double C_tilde = 0.0;  // max over pairs
  double J = 0.0;
  double kappa = 0.0;
  double L = 0.0;
  double gamma = 0.0;
  double c_prime = 0.0;

  std::size_t N() const { return instances.size(); }
  bool g_norms_ok() const;
  bool separation_holds() const;
  bool kl_chain_holds() const;
};

// ell = floor(0.5 (alpha / phi^-1(eps / R))^{1/b}).
int family_ell(const IndexFunction& phi, double R, double epsilon, const DecayBounds& decay);

HardFamily build_hard_family(const ForwardOp& op, const H2Space& h2, const H1Vec& fbar, const IndexFunction& phi,
                             double R, double epsilon, const FamilyOptions& opts = {});

struct HsCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // lhs / ||input difference||_HS, 0 when the inputs coincide
  bool holds = false;
};

// ||theta(F) - theta(Ft)||_HS <= L_theta ||F - Ft||_HS for symmetric F, Ft.
HsCheck hs_operator_lipschitz_check(double theta_lipschitz, const std::function<double(double)>& theta,
                                    const Matrix& F, const Matrix& Ft);

// ||T^{1/2} - Tt^{1/2}||_HS <= sqrt(2) ||B - Bt||_HS with T = B^T B.
HsCheck hs_sqrt_perturbation_check(const Matrix& B, const Matrix& Bt);

}  // namespace nlinv
