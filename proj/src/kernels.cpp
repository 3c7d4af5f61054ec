#include "nlinv/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nlinv/errors.hpp"

namespace nlinv {

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::gaussian:
      return "gaussian";
    case KernelFamily::sobolev1d:
      return "sobolev1d";
    case KernelFamily::matern:
      return "matern";
  }
  return "unknown";
}

namespace {

void check_domain(const Interval& d) {
  if (!(d.a < d.b) || !std::isfinite(d.a) || !std::isfinite(d.b))
    throw ArgumentError("kernel domain must be a finite interval with a < b");
}

// Matern correlation with unit variance at scaled distance s = sqrt(2 nu) r / l.
double matern_unit(double nu, double s) {
  if (s == 0.0) return 1.0;
  if (nu == 0.5) return std::exp(-s);
  if (nu == 1.5) return (1.0 + s) * std::exp(-s);
  if (nu == 2.5) return (1.0 + s + s * s / 3.0) * std::exp(-s);
  if (s > 700.0) return 0.0;
  return std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(s, nu) * std::cyl_bessel_k(nu, s);
}

}  // namespace

Kernel Kernel::gaussian(double lengthscale, Interval domain) {
  check_domain(domain);
  if (!(lengthscale > 0.0)) throw ArgumentError("gaussian kernel: lengthscale must be positive");
  Kernel k;
  k.family_ = KernelFamily::gaussian;
  k.domain_ = domain;
  k.lengthscale_ = lengthscale;
  return k;
}

Kernel Kernel::sobolev1d(int order, Interval domain) {
  check_domain(domain);
  if (order < 1) throw ArgumentError("sobolev1d kernel: order must be a positive integer");
  Kernel k;
  k.family_ = KernelFamily::sobolev1d;
  k.domain_ = domain;
  k.order_ = order;
  k.nu_ = order - 0.5;
  // Inverse Fourier transform of (1 + xi^2)^-order: Matern with l = sqrt(2 nu) and
  // variance Gamma(order - 1/2) / (2 sqrt(pi) Gamma(order)).
  k.lengthscale_ = std::sqrt(2.0 * k.nu_);
  k.scale_ = std::tgamma(order - 0.5) / (2.0 * std::sqrt(std::numbers::pi) * std::tgamma(order));
  return k;
}

Kernel Kernel::matern(double nu, double lengthscale, Interval domain) {
  check_domain(domain);
  if (!(nu > 0.0)) throw ArgumentError("matern kernel: smoothness must be positive");
  if (!(lengthscale > 0.0)) throw ArgumentError("matern kernel: lengthscale must be positive");
  Kernel k;
  k.family_ = KernelFamily::matern;
  k.domain_ = domain;
  k.nu_ = nu;
  k.lengthscale_ = lengthscale;
  return k;
}

double Kernel::radial(double r) const {
  switch (family_) {
    case KernelFamily::gaussian:
      return std::exp(-(r * r) / (2.0 * lengthscale_ * lengthscale_));
    case KernelFamily::sobolev1d:
      if (order_ == 1) return 0.5 * std::exp(-r);
      return scale_ * matern_unit(nu_, std::sqrt(2.0 * nu_) * r / lengthscale_);
    case KernelFamily::matern:
      return matern_unit(nu_, std::sqrt(2.0 * nu_) * r / lengthscale_);
  }
  return 0.0;
}

double Kernel::eval_unchecked(double x, double y) const { return radial(std::abs(x - y)); }

double Kernel::operator()(double x, double y) const {
  if (!domain_.contains(x) || !domain_.contains(y)) {
    std::ostringstream os;
    os << "kernel evaluated outside [" << domain_.a << ", " << domain_.b << "] at (" << x << ", "
       << y << ")";
    throw DomainError(os.str());
  }
  return eval_unchecked(x, y);
}

double kernel_eval(const Kernel& k, double x, double y) { return k(x, y); }

Matrix gram(const Kernel& k, std::span<const double> nodes) {
  std::vector<double> sorted(nodes.begin(), nodes.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ArgumentError("gram: duplicate nodes");
  const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = k(nodes[i], nodes[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      g(i, j) = k(nodes[i], nodes[j]);
      g(j, i) = g(i, j);
    }
  }
  return g;
}

Matrix cross_gram(const Kernel& k, std::span<const double> xs, std::span<const double> ys) {
  Matrix g(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j) g(i, j) = k(xs[i], ys[j]);
  return g;
}

double kappa(const Kernel& k, std::span<const double> probe_grid) {
  if (probe_grid.empty()) throw ArgumentError("kappa: empty probe grid");
  double best = 0.0;
  for (double x : probe_grid) best = std::max(best, k(x, x));
  return std::sqrt(best);
}

EigenDecay fit_decay(const Vector& eigenvalues) {
  EigenDecay out;
  out.eigenvalues = eigenvalues.cwiseMax(0.0);
  for (Eigen::Index i = 1; i < out.eigenvalues.size(); ++i)
    if (out.eigenvalues(i) > out.eigenvalues(i - 1) * (1.0 + 1e-12))
      throw ArgumentError("fit_decay: eigenvalues must be sorted descending");
  if (out.eigenvalues.size() == 0 || !(out.eigenvalues(0) > 0.0))
    throw InsufficientDataError("fit_decay: no positive eigenvalues");
  const double cutoff = 1e-12 * out.eigenvalues(0);
  std::vector<double> ln, lt;
  for (Eigen::Index i = 0; i < out.eigenvalues.size() && out.eigenvalues(i) > cutoff; ++i) {
    ln.push_back(std::log(static_cast<double>(i + 1)));
    lt.push_back(std::log(out.eigenvalues(i)));
  }
  out.n_reliable = static_cast<int>(ln.size());
  if (out.n_reliable < 4) throw InsufficientDataError("fit_decay: fewer than 4 reliable eigenvalues");
  const LineFit fit = fit_line(ln, lt);
  out.fitted_b = -fit.slope;
  out.fit_residual = fit.residual;
  double log_beta = fit.intercept;
  for (std::size_t i = 0; i < ln.size(); ++i)
    log_beta = std::max(log_beta, lt[i] + out.fitted_b * ln[i]);
  out.fitted_beta = std::exp(log_beta);
  out.degenerate = !(out.fitted_b > 1.0);
  return out;
}

EigenDecay estimate_decay(const Matrix& g, const Vector& weights) {
  if (g.rows() != g.cols() || g.rows() != weights.size())
    throw ShapeError("estimate_decay: Gram and weights sizes differ");
  if ((weights.array() <= 0.0).any()) throw ArgumentError("estimate_decay: weights must be positive");
  const Vector sw = weights.cwiseSqrt();
  const Matrix s = sw.asDiagonal() * g * sw.asDiagonal();
  return fit_decay(sym_eig(0.5 * (s + s.transpose())).values);
}

}  // namespace nlinv
