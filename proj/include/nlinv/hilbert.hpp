#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlinv/kernels.hpp"
#include "nlinv/linalg.hpp"

namespace nlinv {

// Quadrature nodes and weights on an interval.
struct Grid {
  Vector nodes;    // strictly increasing
  Vector weights;  // positive
  Interval domain;
  bool normalized = false;  // weights sum to 1 instead of b - a
  std::string rule = "trapezoid";

  Eigen::Index size() const { return nodes.size(); }
  std::span<const double> node_span() const { return {nodes.data(), static_cast<std::size_t>(nodes.size())}; }
  // Weights rescaled to sum to one (uniform design measure).
  Vector probability_weights() const { return weights / weights.sum(); }
  // Index of the node equal to x, if any.
  std::optional<Eigen::Index> node_index(double x) const;
};

using GridPtr = std::shared_ptr<const Grid>;

// Composite trapezoid rule on n uniform nodes.
GridPtr make_trapezoid_grid(Interval domain, int n, bool normalize = false);
// Arbitrary nodes and weights; validated.
GridPtr make_grid(Vector nodes, Vector weights, Interval domain, bool normalized, std::string rule = "custom");

enum class NormMode { weighted_l2, rkhs };

// Discretized solution space H1: node values with a Gram form <f, g> = f^T Wn g.
class H1Space {
 public:
  static std::shared_ptr<const H1Space> weighted_l2(GridPtr grid);
  // Norm of the RKHS of k, <f, g> = f^T G^-1 g. Requires a well conditioned Gram matrix.
  static std::shared_ptr<const H1Space> rkhs(GridPtr grid, const Kernel& k);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  NormMode mode() const { return mode_; }
  Eigen::Index size() const { return grid_->size(); }

  double inner(const Vector& f, const Vector& g) const;
  Vector apply_gram(const Vector& f) const;  // Wn f
  const Matrix& gram_form() const { return wn_; }
  // Symmetric S with S^T S = Wn; u = S f are orthonormal coordinates.
  const Matrix& sqrt_form() const { return s_; }
  const Matrix& inv_sqrt_form() const { return s_inv_; }
  Vector to_coords(const Vector& f) const;
  Vector from_coords(const Vector& u) const;

 private:
  H1Space() = default;
  GridPtr grid_;
  NormMode mode_ = NormMode::weighted_l2;
  Vector diag_;  // weights in weighted_l2 mode
  Matrix wn_, s_, s_inv_;
};

using H1SpacePtr = std::shared_ptr<const H1Space>;

// Element of H1: values at the grid nodes.
class H1Vec {
 public:
  H1Vec(H1SpacePtr space, Vector values);
  static H1Vec constant(H1SpacePtr space, double c);
  static H1Vec zeros(H1SpacePtr space) { return constant(std::move(space), 0.0); }

  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  const H1Space& space() const { return *space_; }
  const H1SpacePtr& space_ptr() const { return space_; }
  const Grid& grid() const { return space_->grid(); }
  Eigen::Index size() const { return values_.size(); }

  H1Vec& operator+=(const H1Vec& o);
  H1Vec& operator-=(const H1Vec& o);
  H1Vec& operator*=(double a);

 private:
  H1SpacePtr space_;
  Vector values_;
};

// Throws ShapeError unless a and b live in compatible spaces on the same grid.
void require_same_space(const H1Vec& a, const H1Vec& b, const char* what);
bool same_grid(const Grid& a, const Grid& b);

double inner(const H1Vec& f, const H1Vec& g);
double norm(const H1Vec& f);
H1Vec operator+(H1Vec a, const H1Vec& b);
H1Vec operator-(H1Vec a, const H1Vec& b);
H1Vec operator*(double s, H1Vec a);

// The RKHS H2 of a kernel, represented by node values and kernel interpolation.
class H2Space {
 public:
  H2Space(const Kernel& k, GridPtr grid);

  const Kernel& kernel() const { return k_; }
  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Matrix& gram() const { return g_; }
  // Pseudo-inverse of the Gram matrix (eigenvalues below 1e-13 * max are dropped).
  const Matrix& gram_pinv() const { return g_pinv_; }
  const Matrix& gram_inv_sqrt() const { return g_inv_sqrt_; }
  double kappa() const { return kappa_; }

  // Rows K(x_i, s) G^+; maps node values to values at x. Node hits are exact.
  Matrix interpolation_rows(std::span<const double> x) const;
  Vector evaluate(const Vector& values, std::span<const double> x) const;
  double inner(const Vector& u, const Vector& v) const;
  double norm(const Vector& u) const;

 private:
  Kernel k_;
  GridPtr grid_;
  Matrix g_, g_pinv_, g_inv_sqrt_;
  double kappa_ = 0.0;
};

using H2SpacePtr = std::shared_ptr<const H2Space>;

// (f(x_1), ..., f(x_m)) for an H2 function given by node values.
Vector sampling_apply(const H2Space& h2, const Vector& f_values, std::span<const double> x);
// Node values of (1/m) sum_i K(., x_i) c_i.
Vector sampling_adjoint(const Kernel& k, std::span<const double> x, const Vector& c, const Grid& grid);

// W^{1/2} G W^{1/2}, the symmetric discretization of L_K.
Matrix empirical_covariance(const Kernel& k, const Grid& grid);

struct DecayParams {
  double b = 2.0;
  double beta = 1.0;
};

struct EffDim {
  double lambda = 0.0;
  double value = 0.0;
  double trivial_bound = 0.0;  // (sum of eigenvalues) / lambda
  std::optional<double> decay_bound;
};

// Constant C with sum_n t_n / (t_n + lambda) <= C lambda^{-1/b} whenever t_n <= beta n^-b.
double effdim_decay_constant(const DecayParams& d);

EffDim effective_dimension(const Vector& eigs, double lambda, std::optional<DecayParams> decay = std::nullopt);

enum class NoiseModel { gaussian, truncated_gaussian };
std::string to_string(NoiseModel m);
NoiseModel noise_model_from_string(const std::string& s);

struct NoiseMeta {
  NoiseModel model = NoiseModel::gaussian;
  double sigma = 0.0;
  double M = 0.0;
  double Sigma_bernstein = 0.0;
};

// Observations z = (x_i, y_i).
struct SampleSet {
  std::vector<double> x;
  std::vector<double> y;
  std::uint64_t seed = 0;
  NoiseMeta noise;

  std::size_t m() const { return x.size(); }
  void validate() const;
};

}  // namespace nlinv
