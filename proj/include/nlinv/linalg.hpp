#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace nlinv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Eigen-decomposition of a symmetric matrix with eigenvalues sorted descending.
struct SymEig {
  Vector values;   // descending
  Matrix vectors;  // columns match values
};

SymEig sym_eig(const Matrix& a);

// theta(A) for symmetric A, applied through the spectral decomposition.
Matrix spectral_apply(const Matrix& a, const std::function<double(double)>& theta);

// Symmetric PSD square root; negative eigenvalues from round-off are clamped to zero.
Matrix psd_sqrt(const Matrix& a);

// Largest singular value.
double spectral_norm(const Matrix& a);

double hs_norm(const Matrix& a);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double residual = 0.0;  // root mean square of residuals
};

// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Least squares in log-log coordinates. All inputs must be positive.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> v);

}  // namespace nlinv
