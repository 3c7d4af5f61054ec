#pragma once

#include <span>
#include <string>
#include <vector>

#include "nlinv/linalg.hpp"

namespace nlinv {

struct Interval {
  double a = 0.0;
  double b = 1.0;

  bool contains(double x) const { return x >= a && x <= b; }
  double length() const { return b - a; }
};

enum class KernelFamily { gaussian, sobolev1d, matern };

std::string to_string(KernelFamily f);

// Scalar reproducing kernel on a closed interval.
class Kernel {
 public:
  static Kernel gaussian(double lengthscale, Interval domain = {});
  // Sobolev kernel of W^{order,2}(R) restricted to the interval; order 1 is 0.5*exp(-|x-y|),
  // higher orders use the Matern form with nu = order - 1/2.
  static Kernel sobolev1d(int order, Interval domain = {});
  static Kernel matern(double nu, double lengthscale, Interval domain = {});

  // Throws DomainError when x or y is outside the domain.
  double operator()(double x, double y) const;
  // Same without the domain check; callers guarantee membership.
  double eval_unchecked(double x, double y) const;

  KernelFamily family() const { return family_; }
  const Interval& domain() const { return domain_; }
  double lengthscale() const { return lengthscale_; }
  double nu() const { return nu_; }
  int order() const { return order_; }

 private:
  Kernel() = default;
  double radial(double r) const;

  KernelFamily family_ = KernelFamily::gaussian;
  Interval domain_;
  double lengthscale_ = 1.0;
  double nu_ = 0.5;
  int order_ = 1;
  double scale_ = 1.0;  // variance factor, only used by sobolev1d with order > 1
};

double kernel_eval(const Kernel& k, double x, double y);

// Gram matrix on pairwise distinct nodes.
Matrix gram(const Kernel& k, std::span<const double> nodes);

// Cross Gram K(xs[i], ys[j]).
Matrix cross_gram(const Kernel& k, std::span<const double> xs, std::span<const double> ys);

double kappa(const Kernel& k, std::span<const double> probe_grid);

// Polynomial eigen-decay fit t_n <= beta * n^-b.
struct EigenDecay {
  Vector eigenvalues;     // descending, clamped at zero
  double fitted_b = 0.0;
  double fitted_beta = 0.0;
  double fit_residual = 0.0;  // rms residual of the log-log fit
  int n_reliable = 0;
  bool degenerate = false;  // fitted_b <= 1: not a usable decay class
};

// Fit on a descending spectrum. Only eigenvalues above 1e-12 * t_1 are used.
EigenDecay fit_decay(const Vector& eigenvalues);

// Eigenvalues of W^{1/2} G W^{1/2} followed by fit_decay.
EigenDecay estimate_decay(const Matrix& g, const Vector& weights);

}  // namespace nlinv
