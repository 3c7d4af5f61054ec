#include <gtest/gtest.h>

#include <cmath>

#include "nlinv/errors.hpp"
#include "nlinv/kernels.hpp"
#include "nlinv/rng.hpp"

using namespace nlinv;

TEST(Kernel, GaussianDiagonalIsOne) {
  const Kernel k = Kernel::gaussian(1.0);
  EXPECT_DOUBLE_EQ(kernel_eval(k, 0.3, 0.3), 1.0);
}

TEST(Kernel, Sobolev1AtOrigin) {
  const Kernel k = Kernel::sobolev1d(1);
  EXPECT_NEAR(kernel_eval(k, 0.0, 0.0), 0.5, 1e-15);
}

TEST(Kernel, Sobolev1MatchesFourierIntegral) {
  // (2 pi)^-1 int exp(i xi r) / (1 + xi^2) d xi = exp(-|r|) / 2
  const Kernel k = Kernel::sobolev1d(1);
  for (double r : {0.1, 0.4, 0.9}) EXPECT_NEAR(k(0.0, r), 0.5 * std::exp(-r), 1e-15);
}

TEST(Kernel, GaussianClosedForm) {
  const Kernel k = Kernel::gaussian(1.0);
  EXPECT_NEAR(kernel_eval(k, 0.0, 1.0), 0.60653065971263342, 1e-14);
}

TEST(Kernel, MaternClosedForms) {
  const Kernel m32 = Kernel::matern(1.5, 1.0);
  EXPECT_DOUBLE_EQ(m32(0.2, 0.2), 1.0);
  const double r = 0.7, s3 = std::sqrt(3.0) * r;
  EXPECT_NEAR(m32(0.0, r), (1.0 + s3) * std::exp(-s3), 1e-14);
  const Kernel m52 = Kernel::matern(2.5, 0.5);
  const double s5 = std::sqrt(5.0) * 0.3 / 0.5;
  EXPECT_NEAR(m52(0.1, 0.4), (1.0 + s5 + s5 * s5 / 3.0) * std::exp(-s5), 1e-14);
  // general nu uses the Bessel form; nu = 0.5 must agree with the exponential
  const Kernel m05 = Kernel::matern(0.5, 0.8);
  EXPECT_NEAR(m05(0.0, 0.6), std::exp(-0.6 / 0.8), 1e-14);
  const Kernel m1 = Kernel::matern(1.0, 1.0);
  EXPECT_NEAR(m1(0.0, 0.5), 0.5 * std::sqrt(2.0) * std::cyl_bessel_k(1.0, std::sqrt(2.0) * 0.5), 1e-12);
}

TEST(Kernel, SobolevHigherOrderIsPositiveDefiniteAndSmooth) {
  const Kernel k = Kernel::sobolev1d(2);
  // W^{2,2}(R) kernel: (1 + r) exp(-r) / 4
  for (double r : {0.0, 0.3, 1.0}) EXPECT_NEAR(k(0.0, r), 0.25 * (1.0 + r) * std::exp(-r), 1e-14);
}

TEST(Kernel, Symmetry) {
  Rng rng(3);
  for (const Kernel& k : {Kernel::gaussian(0.3), Kernel::sobolev1d(1), Kernel::matern(1.2, 0.4)})
    for (int i = 0; i < 200; ++i) {
      const double x = uniform01(rng), y = uniform01(rng);
      EXPECT_EQ(kernel_eval(k, x, y), kernel_eval(k, y, x));
    }
}

TEST(Kernel, DomainChecks) {
  const Kernel k = Kernel::gaussian(1.0, {0.0, 1.0});
  EXPECT_THROW(kernel_eval(k, -0.1, 0.5), DomainError);
  EXPECT_THROW(kernel_eval(k, 0.5, 1.5), DomainError);
  EXPECT_THROW(Kernel::gaussian(0.0), ArgumentError);
  EXPECT_THROW(Kernel::matern(-1.0, 1.0), ArgumentError);
  EXPECT_THROW(Kernel::sobolev1d(0), ArgumentError);
}

TEST(Gram, SingleNode) {
  const Kernel k = Kernel::sobolev1d(1);
  const std::vector<double> x{0.25};
  const Matrix g = gram(k, x);
  ASSERT_EQ(g.rows(), 1);
  EXPECT_DOUBLE_EQ(g(0, 0), k(0.25, 0.25));
}

TEST(Gram, TwoNodesGaussian) {
  const double l = 0.3, d = 0.2;
  const Kernel k = Kernel::gaussian(l);
  const std::vector<double> x{0.1, 0.1 + d};
  const Matrix g = gram(k, x);
  EXPECT_NEAR(g(0, 1), std::exp(-d * d / (2 * l * l)), 1e-15);
  EXPECT_EQ(g(0, 1), g(1, 0));
}

TEST(Gram, SymmetricPsd) {
  Rng rng(11);
  for (const Kernel& k : {Kernel::gaussian(0.2), Kernel::sobolev1d(1), Kernel::matern(2.5, 0.3)}) {
    std::vector<double> x;
    for (int i = 0; i < 256; ++i) x.push_back((i + uniform01(rng)) / 256.0);
    const Matrix g = gram(k, x);
    EXPECT_TRUE(g.isApprox(g.transpose(), 0.0));
    const SymEig e = sym_eig(g);
    EXPECT_GE(e.values.minCoeff(), -1e-10 * e.values.maxCoeff());
  }
}

TEST(Gram, DuplicateNodesRejected) {
  const std::vector<double> x{0.1, 0.5, 0.1};
  EXPECT_THROW(gram(Kernel::gaussian(1.0), x), ArgumentError);
}

TEST(Kappa, Values) {
  std::vector<double> probe;
  for (int i = 0; i <= 100; ++i) probe.push_back(i / 100.0);
  EXPECT_DOUBLE_EQ(kappa(Kernel::gaussian(0.5), probe), 1.0);
  EXPECT_NEAR(kappa(Kernel::sobolev1d(1), probe), 0.70710678118654757, 1e-15);
  EXPECT_DOUBLE_EQ(kappa(Kernel::matern(1.5, 1.0), probe), 1.0);
}

TEST(Decay, FlatSpectrumIsDegenerate) {
  const int n = 32;
  const EigenDecay d = estimate_decay(Matrix::Identity(n, n), Vector::Constant(n, 1.0 / n));
  for (Eigen::Index i = 0; i < n; ++i) EXPECT_NEAR(d.eigenvalues(i), 1.0 / n, 1e-15);
  EXPECT_TRUE(d.degenerate);
  EXPECT_NEAR(d.fitted_b, 0.0, 1e-9);
}

TEST(Decay, SyntheticPowerLaw) {
  Vector t(200);
  for (int i = 0; i < 200; ++i) t(i) = 1.0 / std::pow(i + 1.0, 2.0);
  const EigenDecay d = fit_decay(t);
  EXPECT_NEAR(d.fitted_b, 2.0, 0.05);
  for (double b0 : {1.5, 3.0})
    for (double beta0 : {0.2, 4.0}) {
      for (int i = 0; i < 200; ++i) t(i) = beta0 * std::pow(i + 1.0, -b0);
      const EigenDecay e = fit_decay(t);
      EXPECT_NEAR(e.fitted_b, b0, 0.01 * b0);
      EXPECT_NEAR(e.fitted_beta, beta0, 0.01 * beta0);
    }
}

TEST(Decay, Sobolev1GramDecaysLikeNSquared) {
  const Kernel k = Kernel::sobolev1d(1);
  std::vector<double> x;
  for (int i = 0; i < 256; ++i) x.push_back(i / 255.0);
  Vector w = Vector::Constant(256, 1.0 / 255.0);
  w(0) *= 0.5;
  w(255) *= 0.5;
  const EigenDecay d = estimate_decay(gram(k, x), w);
  EXPECT_NEAR(d.fitted_b, 2.0, 0.3);
  EXPECT_FALSE(d.degenerate);
}

TEST(Decay, RejectsUnsortedAndEmpty) {
  Vector t(5);
  t << 1, 2, 0.5, 0.2, 0.1;
  EXPECT_THROW(fit_decay(t), ArgumentError);
  EXPECT_THROW(fit_decay(Vector::Zero(4)), InsufficientDataError);
}
