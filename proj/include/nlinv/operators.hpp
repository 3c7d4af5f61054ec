#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "nlinv/hilbert.hpp"
#include "nlinv/linalg.hpp"

namespace nlinv {

enum class OpKind { identity, linear_integral, quadratic_integral };
std::string to_string(OpKind k);
OpKind op_kind_from_string(const std::string& s);

using ThetaFn = std::function<double(double x, double s)>;

// Integral kernel theta(x, s): a callable, or a table with rows at sorted evaluation
// nodes and columns at the grid nodes (rows are interpolated linearly in x).
class Theta {
 public:
  static Theta callable(ThetaFn fn, std::string name = "custom");
  static Theta table(Vector eval_nodes, Matrix values);
  // Named kernels: "gaussian" exp(-(x-s)^2), "volterra" 1[s <= x], "one", "product" x*s.
  static Theta named(const std::string& name);

  // theta(x_i, s_j) for grid nodes s_j.
  Matrix rows(std::span<const double> x, const Grid& grid) const;
  const std::string& name() const { return name_; }
  bool is_table() const { return !fn_; }

 private:
  ThetaFn fn_;
  Vector eval_nodes_;
  Matrix table_;
  std::string name_;
};

// Matrix representation of A (or A') at a fixed set of evaluation points.
// For integral kinds phi(i, j) = theta(x_i, s_j) w_j; for identity it holds interpolation rows.
struct OpDesign {
  OpKind kind = OpKind::identity;
  Matrix phi;

  Vector apply(const Vector& f) const;
  Vector deriv(const Vector& f, const Vector& g) const;
  Matrix jacobian(const Vector& f) const;
};

class ForwardOp {
 public:
  // Identity embedding H1 -> H2; off-node evaluation uses kernel interpolation.
  static ForwardOp identity(H1SpacePtr h1, H2SpacePtr h2);
  static ForwardOp linear_integral(H1SpacePtr h1, Theta theta);
  static ForwardOp quadratic_integral(H1SpacePtr h1, Theta theta);

  OpKind kind() const { return kind_; }
  bool is_linear() const { return kind_ != OpKind::quadratic_integral; }
  const H1SpacePtr& h1() const { return h1_; }
  const Grid& grid() const { return h1_->grid(); }
  const Theta* theta() const { return theta_ ? theta_.get() : nullptr; }

  OpDesign design(std::span<const double> x) const;
  // Design at the grid nodes (cached).
  const OpDesign& node_design() const { return *node_design_; }

  Vector apply(const H1Vec& f, std::span<const double> x) const;
  Vector deriv(const H1Vec& f, const H1Vec& g, std::span<const double> x) const;
  Matrix jacobian(const H1Vec& f, std::span<const double> x) const;

  std::optional<double> lipschitz_L;
  std::optional<double> nonlinearity_gamma;
  std::optional<double> ball_radius_d;

 private:
  ForwardOp() = default;
  void check(const H1Vec& f) const;

  OpKind kind_ = OpKind::identity;
  H1SpacePtr h1_;
  H2SpacePtr h2_;
  std::shared_ptr<const Theta> theta_;
  std::shared_ptr<const OpDesign> node_design_;
};

Vector forward_apply(const ForwardOp& op, const H1Vec& f, std::span<const double> x);
Vector forward_deriv(const ForwardOp& op, const H1Vec& f, const H1Vec& g, std::span<const double> x);

// L2(rho_X) norm of A(f) - A(f0) - A'(f0)(f - f0), by quadrature on the grid.
double taylor_remainder(const ForwardOp& op, const H1Vec& f, const H1Vec& f0);

struct LinearizedSystem {
  Matrix B_x;       // m x n, rows A'(f0) at the design points (node-value columns)
  Matrix T_x;       // n x n, B_x^T B_x / m in H1-orthonormal coordinates
  Matrix B;         // n x n, rows A'(f0) at the grid nodes
  Matrix T;         // n x n, population B^* B in H1-orthonormal coordinates (quadrature over rho_X)
  H1Vec base_point;
};

LinearizedSystem linearize(const ForwardOp& op, const H1Vec& f0, std::span<const double> x);

// Population T at f in H1-orthonormal coordinates, symmetric PSD.
Matrix population_T(const ForwardOp& op, const H1Vec& f);

// Operator norm of B = I_K A'(f) as a map H1 -> L2(rho_X).
double linearized_norm(const ForwardOp& op, const H1Vec& f);

// Operator norm of A'(f) as a map H1 -> H2 (the constant L).
double derivative_norm_h2(const ForwardOp& op, const H2Space& h2, const H1Vec& f);

// Certified gamma for the quadratic operator:
// ||A(h)||_{L2} <= max_j ||theta(., s_j)||_{L2} * ||h||_W^2, and ||h||_W <= c ||h||_{H1}.
double quadratic_gamma_bound(const ForwardOp& op);

// Empirical gamma: 1.2 * max over random probe pairs of 2 * remainder / ||f - f0||^2.
double estimate_gamma(const ForwardOp& op, const H1Vec& center, double radius, int probes, std::uint64_t seed);

}  // namespace nlinv
