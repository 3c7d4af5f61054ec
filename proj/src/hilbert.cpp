#include "nlinv/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nlinv/errors.hpp"

namespace nlinv {

std::optional<Eigen::Index> Grid::node_index(double x) const {
  const double* b = nodes.data();
  const double* e = b + nodes.size();
  const double* it = std::lower_bound(b, e, x);
  if (it != e && *it == x) return static_cast<Eigen::Index>(it - b);
  return std::nullopt;
}

GridPtr make_trapezoid_grid(Interval domain, int n, bool normalize) {
  if (!(domain.a < domain.b)) throw ArgumentError("grid: need a < b");
  if (n < 2) throw ArgumentError("grid: trapezoid rule needs n >= 2");
  Vector nodes(n), weights(n);
  const double h = domain.length() / (n - 1);
  for (int i = 0; i < n; ++i) {
    nodes(i) = i == n - 1 ? domain.b : domain.a + i * h;
    weights(i) = (i == 0 || i == n - 1) ? 0.5 * h : h;
  }
  if (normalize) weights /= domain.length();
  return make_grid(std::move(nodes), std::move(weights), domain, normalize, "trapezoid");
}

GridPtr make_grid(Vector nodes, Vector weights, Interval domain, bool normalized, std::string rule) {
  if (nodes.size() == 0) throw ArgumentError("grid: no nodes");
  if (nodes.size() != weights.size()) throw ShapeError("grid: nodes and weights differ in length");
  for (Eigen::Index i = 0; i < nodes.size(); ++i) {
    if (!domain.contains(nodes(i))) throw DomainError("grid: node outside the domain");
    if (i > 0 && !(nodes(i) > nodes(i - 1))) throw ArgumentError("grid: nodes must be strictly increasing");
    if (!(weights(i) > 0.0)) throw ArgumentError("grid: weights must be positive");
  }
  auto g = std::make_shared<Grid>();
  g->nodes = std::move(nodes);
  g->weights = std::move(weights);
  g->domain = domain;
  g->normalized = normalized;
  g->rule = std::move(rule);
  return g;
}

std::shared_ptr<const H1Space> H1Space::weighted_l2(GridPtr grid) {
  if (!grid) throw ArgumentError("H1Space: null grid");
  std::shared_ptr<H1Space> s(new H1Space());
  s->grid_ = std::move(grid);
  s->mode_ = NormMode::weighted_l2;
  s->diag_ = s->grid_->weights;
  s->wn_ = s->diag_.asDiagonal();
  s->s_ = s->diag_.cwiseSqrt().asDiagonal();
  s->s_inv_ = s->diag_.cwiseSqrt().cwiseInverse().asDiagonal();
  return s;
}

std::shared_ptr<const H1Space> H1Space::rkhs(GridPtr grid, const Kernel& k) {
  if (!grid) throw ArgumentError("H1Space: null grid");
  std::shared_ptr<H1Space> s(new H1Space());
  s->grid_ = std::move(grid);
  s->mode_ = NormMode::rkhs;
  const SymEig e = sym_eig(gram(k, s->grid_->node_span()));
  const double lo = e.values(e.values.size() - 1);
  if (!(lo > 1e-12 * e.values(0)))
    throw NumericalError("H1Space::rkhs: Gram matrix too ill-conditioned for an RKHS norm");
  const Matrix& v = e.vectors;
  s->wn_ = v * e.values.cwiseInverse().asDiagonal() * v.transpose();
  s->s_ = v * e.values.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  s->s_inv_ = v * e.values.cwiseSqrt().asDiagonal() * v.transpose();
  return s;
}

double H1Space::inner(const Vector& f, const Vector& g) const {
  if (mode_ == NormMode::weighted_l2) return (f.array() * diag_.array() * g.array()).sum();
  return f.dot(wn_ * g);
}

Vector H1Space::apply_gram(const Vector& f) const {
  if (mode_ == NormMode::weighted_l2) return diag_.cwiseProduct(f);
  return wn_ * f;
}

Vector H1Space::to_coords(const Vector& f) const {
  if (mode_ == NormMode::weighted_l2) return diag_.cwiseSqrt().cwiseProduct(f);
  return s_ * f;
}

Vector H1Space::from_coords(const Vector& u) const {
  if (mode_ == NormMode::weighted_l2) return u.cwiseQuotient(diag_.cwiseSqrt());
  return s_inv_ * u;
}

H1Vec::H1Vec(H1SpacePtr space, Vector values) : space_(std::move(space)), values_(std::move(values)) {
  if (!space_) throw ArgumentError("H1Vec: null space");
  if (values_.size() != space_->size()) throw ShapeError("H1Vec: value count differs from grid size");
}

H1Vec H1Vec::constant(H1SpacePtr space, double c) {
  const Eigen::Index n = space->size();
  return H1Vec(std::move(space), Vector::Constant(n, c));
}

bool same_grid(const Grid& a, const Grid& b) {
  if (&a == &b) return true;
  return a.nodes.size() == b.nodes.size() && a.nodes == b.nodes && a.weights == b.weights;
}

void require_same_space(const H1Vec& a, const H1Vec& b, const char* what) {
  if (a.space_ptr() == b.space_ptr()) return;
  const bool ok = same_grid(a.grid(), b.grid()) && a.space().mode() == NormMode::weighted_l2 &&
                  b.space().mode() == NormMode::weighted_l2;
  if (!ok) throw ShapeError(std::string(what) + ": vectors live on different grids or norms");
}

H1Vec& H1Vec::operator+=(const H1Vec& o) {
  require_same_space(*this, o, "H1Vec +");
  values_ += o.values_;
  return *this;
}

H1Vec& H1Vec::operator-=(const H1Vec& o) {
  require_same_space(*this, o, "H1Vec -");
  values_ -= o.values_;
  return *this;
}

H1Vec& H1Vec::operator*=(double a) {
  values_ *= a;
  return *this;
}

double inner(const H1Vec& f, const H1Vec& g) {
  require_same_space(f, g, "inner");
  return f.space().inner(f.values(), g.values());
}

double norm(const H1Vec& f) { return std::sqrt(std::max(0.0, f.space().inner(f.values(), f.values()))); }

H1Vec operator+(H1Vec a, const H1Vec& b) { return a += b; }
H1Vec operator-(H1Vec a, const H1Vec& b) { return a -= b; }
H1Vec operator*(double s, H1Vec a) { return a *= s; }

H2Space::H2Space(const Kernel& k, GridPtr grid) : k_(k), grid_(std::move(grid)) {
  if (!grid_) throw ArgumentError("H2Space: null grid");
  g_ = nlinv::gram(k_, grid_->node_span());
  const SymEig e = sym_eig(g_);
  const double cut = 1e-13 * e.values(0);
  Vector inv(e.values.size()), inv_sqrt(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    const double t = e.values(i);
    inv(i) = t > cut ? 1.0 / t : 0.0;
    inv_sqrt(i) = t > cut ? 1.0 / std::sqrt(t) : 0.0;
  }
  g_pinv_ = e.vectors * inv.asDiagonal() * e.vectors.transpose();
  g_inv_sqrt_ = e.vectors * inv_sqrt.asDiagonal() * e.vectors.transpose();
  kappa_ = nlinv::kappa(k_, grid_->node_span());
}

Matrix H2Space::interpolation_rows(std::span<const double> x) const {
  const Eigen::Index n = grid_->size();
  Matrix rows(static_cast<Eigen::Index>(x.size()), n);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!grid_->domain.contains(x[i])) throw DomainError("sampling point outside the domain");
    if (auto j = grid_->node_index(x[i])) {
      rows.row(i).setZero();
      rows(i, *j) = 1.0;
      continue;
    }
    Eigen::RowVectorXd kx(n);
    for (Eigen::Index j = 0; j < n; ++j) kx(j) = k_(x[i], grid_->nodes(j));
    rows.row(i) = kx * g_pinv_;
  }
  return rows;
}

Vector H2Space::evaluate(const Vector& values, std::span<const double> x) const {
  if (values.size() != grid_->size()) throw ShapeError("H2Space::evaluate: value count differs from grid size");
  return interpolation_rows(x) * values;
}

double H2Space::inner(const Vector& u, const Vector& v) const { return u.dot(g_pinv_ * v); }

double H2Space::norm(const Vector& u) const { return std::sqrt(std::max(0.0, inner(u, u))); }

Vector sampling_apply(const H2Space& h2, const Vector& f_values, std::span<const double> x) {
  return h2.evaluate(f_values, x);
}

Vector sampling_adjoint(const Kernel& k, std::span<const double> x, const Vector& c, const Grid& grid) {
  if (static_cast<std::size_t>(c.size()) != x.size()) throw ShapeError("sampling_adjoint: len(c) != m");
  if (x.empty()) throw ArgumentError("sampling_adjoint: no design points");
  Vector out = Vector::Zero(grid.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (Eigen::Index j = 0; j < grid.size(); ++j) out(j) += k(grid.nodes(j), x[i]) * c(i);
  return out / static_cast<double>(x.size());
}

Matrix empirical_covariance(const Kernel& k, const Grid& grid) {
  const Vector sw = grid.weights.cwiseSqrt();
  return sw.asDiagonal() * gram(k, grid.node_span()) * sw.asDiagonal();
}

double effdim_decay_constant(const DecayParams& d) {
  if (!(d.b > 1.0) || !(d.beta > 0.0)) throw ArgumentError("effdim_decay_constant: need b > 1, beta > 0");
  // sum_n 1/(1 + lambda n^b / beta) <= int_0^inf dx / (1 + lambda x^b / beta)
  const double pb = std::numbers::pi / d.b;
  return std::pow(d.beta, 1.0 / d.b) * pb / std::sin(pb);
}

EffDim effective_dimension(const Vector& eigs, double lambda, std::optional<DecayParams> decay) {
  if (!(lambda > 0.0)) throw ArgumentError("effective_dimension: lambda must be positive");
  EffDim out;
  out.lambda = lambda;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    const double t = std::max(0.0, eigs(i));
    out.value += t / (t + lambda);
    sum += t;
  }
  out.trivial_bound = sum / lambda;
  if (decay) out.decay_bound = effdim_decay_constant(*decay) * std::pow(lambda, -1.0 / decay->b);
  return out;
}

std::string to_string(NoiseModel m) {
  return m == NoiseModel::gaussian ? "gaussian" : "truncated_gaussian";
}

NoiseModel noise_model_from_string(const std::string& s) {
  if (s == "gaussian") return NoiseModel::gaussian;
  if (s == "truncated_gaussian") return NoiseModel::truncated_gaussian;
  throw ArgumentError("unknown noise model '" + s + "'");
}

void SampleSet::validate() const {
  if (x.size() != y.size()) throw ShapeError("SampleSet: len(x) != len(y)");
  if (x.empty()) throw ArgumentError("SampleSet: m must be at least 1");
  if (noise.sigma < 0.0) throw ArgumentError("SampleSet: negative noise sigma");
}

}  // namespace nlinv
