#include "nlinv/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "nlinv/errors.hpp"

namespace nlinv {

SymEig sym_eig(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("sym_eig: matrix is not square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("sym_eig: eigensolver failed");
  SymEig out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  return out;
}

Matrix spectral_apply(const Matrix& a, const std::function<double(double)>& theta) {
  SymEig e = sym_eig(a);
  Vector tv = e.values.unaryExpr(theta);
  return e.vectors * tv.asDiagonal() * e.vectors.transpose();
}

Matrix psd_sqrt(const Matrix& a) {
  return spectral_apply(a, [](double t) { return t > 0.0 ? std::sqrt(t) : 0.0; });
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double hs_norm(const Matrix& a) { return a.norm(); }

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ShapeError("fit_line: size mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw InsufficientDataError("fit_line: need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw InsufficientDataError("fit_line: degenerate abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - fit.intercept - fit.slope * x[i];
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  fit.slope_stderr = n > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
  return fit;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw ArgumentError("fit_loglog: nonpositive abscissa");
    lx[i] = std::log(x[i]);
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw ArgumentError("fit_loglog: nonpositive ordinate");
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

double median(std::vector<double> v) {
  if (v.empty()) throw InsufficientDataError("median of empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace nlinv
