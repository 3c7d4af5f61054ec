#include "nlinv/operators.hpp"

#include <algorithm>
#include <cmath>

#include "nlinv/errors.hpp"
#include "nlinv/rng.hpp"

namespace nlinv {

std::string to_string(OpKind k) {
  switch (k) {
    case OpKind::identity:
      return "identity";
    case OpKind::linear_integral:
      return "linear_integral";
    case OpKind::quadratic_integral:
      return "quadratic_integral";
  }
  return "unknown";
}

OpKind op_kind_from_string(const std::string& s) {
  if (s == "identity") return OpKind::identity;
  if (s == "linear_integral") return OpKind::linear_integral;
  if (s == "quadratic_integral") return OpKind::quadratic_integral;
  throw ArgumentError("unknown operator kind '" + s + "'");
}

Theta Theta::callable(ThetaFn fn, std::string name) {
  if (!fn) throw ArgumentError("Theta: empty callable");
  Theta t;
  t.fn_ = std::move(fn);
  t.name_ = std::move(name);
  return t;
}

Theta Theta::table(Vector eval_nodes, Matrix values) {
  if (eval_nodes.size() == 0 || eval_nodes.size() != values.rows())
    throw ShapeError("Theta::table: one row per evaluation node required");
  for (Eigen::Index i = 1; i < eval_nodes.size(); ++i)
    if (!(eval_nodes(i) > eval_nodes(i - 1))) throw ArgumentError("Theta::table: nodes must increase");
  Theta t;
  t.eval_nodes_ = std::move(eval_nodes);
  t.table_ = std::move(values);
  t.name_ = "table";
  return t;
}

Theta Theta::named(const std::string& name) {
  if (name == "gaussian") return callable([](double x, double s) { return std::exp(-(x - s) * (x - s)); }, name);
  if (name == "volterra") return callable([](double x, double s) { return s <= x ? 1.0 : 0.0; }, name);
  if (name == "one") return callable([](double, double) { return 1.0; }, name);
  if (name == "product") return callable([](double x, double s) { return x * s; }, name);
  throw ArgumentError("unknown theta '" + name + "'");
}

Matrix Theta::rows(std::span<const double> x, const Grid& grid) const {
  const Eigen::Index n = grid.size();
  Matrix out(static_cast<Eigen::Index>(x.size()), n);
  if (fn_) {
    for (std::size_t i = 0; i < x.size(); ++i)
      for (Eigen::Index j = 0; j < n; ++j) out(i, j) = fn_(x[i], grid.nodes(j));
    return out;
  }
  if (table_.cols() != n) throw ShapeError("Theta::table: column count differs from grid size");
  const Eigen::Index r = eval_nodes_.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (r == 1 || xi <= eval_nodes_(0)) {
      if (xi < eval_nodes_(0) - 1e-12) throw DomainError("Theta::table: x below the first row");
      out.row(i) = table_.row(0);
      continue;
    }
    if (xi >= eval_nodes_(r - 1)) {
      if (xi > eval_nodes_(r - 1) + 1e-12) throw DomainError("Theta::table: x above the last row");
      out.row(i) = table_.row(r - 1);
      continue;
    }
    const double* b = eval_nodes_.data();
    const Eigen::Index hi = std::upper_bound(b, b + r, xi) - b;
    const double t = (xi - eval_nodes_(hi - 1)) / (eval_nodes_(hi) - eval_nodes_(hi - 1));
    out.row(i) = (1.0 - t) * table_.row(hi - 1) + t * table_.row(hi);
  }
  return out;
}

Vector OpDesign::apply(const Vector& f) const {
  if (kind == OpKind::quadratic_integral) return phi * f.cwiseAbs2();
  return phi * f;
}

Vector OpDesign::deriv(const Vector& f, const Vector& g) const {
  if (kind == OpKind::quadratic_integral) return 2.0 * (phi * f.cwiseProduct(g));
  return phi * g;
}

Matrix OpDesign::jacobian(const Vector& f) const {
  if (kind == OpKind::quadratic_integral) return 2.0 * phi * f.asDiagonal();
  return phi;
}

ForwardOp ForwardOp::identity(H1SpacePtr h1, H2SpacePtr h2) {
  if (!h1 || !h2) throw ArgumentError("ForwardOp::identity: null space");
  if (!same_grid(h1->grid(), h2->grid())) throw ShapeError("ForwardOp::identity: H1 and H2 grids differ");
  ForwardOp op;
  op.kind_ = OpKind::identity;
  op.h1_ = std::move(h1);
  op.h2_ = std::move(h2);
  op.lipschitz_L = 1.0;
  op.nonlinearity_gamma = 0.0;
  auto nd = std::make_shared<OpDesign>();
  nd->kind = OpKind::identity;
  nd->phi = Matrix::Identity(op.grid().size(), op.grid().size());
  op.node_design_ = nd;
  return op;
}

ForwardOp ForwardOp::linear_integral(H1SpacePtr h1, Theta theta) {
  if (!h1) throw ArgumentError("ForwardOp: null space");
  ForwardOp op;
  op.kind_ = OpKind::linear_integral;
  op.h1_ = std::move(h1);
  op.theta_ = std::make_shared<const Theta>(std::move(theta));
  op.nonlinearity_gamma = 0.0;
  op.node_design_ = std::make_shared<const OpDesign>(op.design(op.grid().node_span()));
  return op;
}

ForwardOp ForwardOp::quadratic_integral(H1SpacePtr h1, Theta theta) {
  ForwardOp op = linear_integral(std::move(h1), std::move(theta));
  op.kind_ = OpKind::quadratic_integral;
  op.nonlinearity_gamma.reset();
  op.node_design_ = std::make_shared<const OpDesign>(op.design(op.grid().node_span()));
  return op;
}

OpDesign ForwardOp::design(std::span<const double> x) const {
  for (double xi : x)
    if (!grid().domain.contains(xi)) throw DomainError("operator evaluated outside the domain");
  OpDesign d;
  d.kind = kind_;
  if (kind_ == OpKind::identity) {
    d.phi = h2_->interpolation_rows(x);
  } else {
    d.phi = theta_->rows(x, grid()) * grid().weights.asDiagonal();
  }
  return d;
}

void ForwardOp::check(const H1Vec& f) const {
  if (!same_grid(f.grid(), grid())) throw ShapeError("operator applied to a vector on a different grid");
}

Vector ForwardOp::apply(const H1Vec& f, std::span<const double> x) const {
  check(f);
  return design(x).apply(f.values());
}

Vector ForwardOp::deriv(const H1Vec& f, const H1Vec& g, std::span<const double> x) const {
  check(f);
  check(g);
  return design(x).deriv(f.values(), g.values());
}

Matrix ForwardOp::jacobian(const H1Vec& f, std::span<const double> x) const {
  check(f);
  return design(x).jacobian(f.values());
}

Vector forward_apply(const ForwardOp& op, const H1Vec& f, std::span<const double> x) { return op.apply(f, x); }

Vector forward_deriv(const ForwardOp& op, const H1Vec& f, const H1Vec& g, std::span<const double> x) {
  return op.deriv(f, g, x);
}

double taylor_remainder(const ForwardOp& op, const H1Vec& f, const H1Vec& f0) {
  require_same_space(f, f0, "taylor_remainder");
  if (!same_grid(f.grid(), op.grid())) throw ShapeError("taylor_remainder: grid mismatch");
  const OpDesign& d = op.node_design();
  const Vector h = f.values() - f0.values();
  const Vector rem = d.apply(f.values()) - d.apply(f0.values()) - d.deriv(f0.values(), h);
  const Vector pw = op.grid().probability_weights();
  return std::sqrt((pw.array() * rem.array().square()).sum());
}

namespace {

Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }

// E = diag(sqrt(pw)) D S^{-1}: population B in orthonormal coordinates.
Matrix population_B_coords(const ForwardOp& op, const H1Vec& f) {
  const Matrix d = op.node_design().jacobian(f.values());
  const Vector spw = op.grid().probability_weights().cwiseSqrt();
  return spw.asDiagonal() * d * op.h1()->inv_sqrt_form();
}

}  // namespace

LinearizedSystem linearize(const ForwardOp& op, const H1Vec& f0, std::span<const double> x) {
  if (x.empty()) throw ArgumentError("linearize: no design points");
  if (!same_grid(f0.grid(), op.grid())) throw ShapeError("linearize: grid mismatch");
  const Matrix& s_inv = op.h1()->inv_sqrt_form();
  Matrix bx = op.jacobian(f0, x);
  const Matrix bxc = bx * s_inv;
  const Matrix e = population_B_coords(op, f0);
  return LinearizedSystem{
      std::move(bx),
      sym(bxc.transpose() * bxc / static_cast<double>(x.size())),
      op.node_design().jacobian(f0.values()),
      sym(e.transpose() * e),
      f0,
  };
}

Matrix population_T(const ForwardOp& op, const H1Vec& f) {
  if (!same_grid(f.grid(), op.grid())) throw ShapeError("population_T: grid mismatch");
  const Matrix e = population_B_coords(op, f);
  return sym(e.transpose() * e);
}

double linearized_norm(const ForwardOp& op, const H1Vec& f) { return spectral_norm(population_B_coords(op, f)); }

double derivative_norm_h2(const ForwardOp& op, const H2Space& h2, const H1Vec& f) {
  if (!same_grid(h2.grid(), op.grid())) throw ShapeError("derivative_norm_h2: grid mismatch");
  const Matrix d = op.node_design().jacobian(f.values());
  return spectral_norm(h2.gram_inv_sqrt() * d * op.h1()->inv_sqrt_form());
}

double quadratic_gamma_bound(const ForwardOp& op) {
  if (op.is_linear()) return 0.0;
  const Grid& g = op.grid();
  const Matrix th = op.theta()->rows(g.node_span(), g);
  const Vector pw = g.probability_weights();
  double col = 0.0;
  for (Eigen::Index j = 0; j < th.cols(); ++j)
    col = std::max(col, std::sqrt((pw.array() * th.col(j).array().square()).sum()));
  // largest ratio ||h||_W^2 / ||h||_{H1}^2
  const Matrix& s_inv = op.h1()->inv_sqrt_form();
  const Matrix m = s_inv.transpose() * g.weights.asDiagonal() * s_inv;
  const double c2 = sym_eig(sym(m)).values(0);
  return 2.0 * col * c2;
}

double estimate_gamma(const ForwardOp& op, const H1Vec& center, double radius, int probes, std::uint64_t seed) {
  if (op.is_linear()) return 0.0;
  if (probes < 1 || !(radius > 0.0)) throw ArgumentError("estimate_gamma: need probes >= 1 and radius > 0");
  Rng rng(seed);
  const Eigen::Index n = center.size();
  double best = 0.0;
  for (int p = 0; p < probes; ++p) {
    H1Vec f0 = center, f = center;
    for (Eigen::Index j = 0; j < n; ++j) {
      f0.values()(j) += radius * (2.0 * uniform01(rng) - 1.0);
      f.values()(j) += radius * (2.0 * uniform01(rng) - 1.0);
    }
    const double h = norm(f - f0);
    if (h > 0.0) best = std::max(best, 2.0 * taylor_remainder(op, f, f0) / (h * h));
  }
  return 1.2 * best;
}

}  // namespace nlinv
