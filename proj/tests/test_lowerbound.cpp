#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "nlinv/lowerbound.hpp"

using namespace nlinv;

namespace {

struct Fixture {
  explicit Fixture(int n = 256)
      : grid(make_trapezoid_grid({0.0, 1.0}, n, true)),
        h1(H1Space::weighted_l2(grid)),
        h2(Kernel::sobolev1d(1), grid),
        op(ForwardOp::linear_integral(h1, Theta::named("volterra"))),
        fbar(H1Vec::zeros(h1)) {}
  GridPtr grid;
  H1SpacePtr h1;
  H2Space h2;
  ForwardOp op;
  H1Vec fbar;
};

Matrix random_symmetric(Rng& rng, int n) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = standard_normal(rng);
  return (0.5 * (a + a.transpose())).eval();
}

void check_family(const HardFamily& fam, double eps) {
  EXPECT_EQ(fam.epsilon, eps);
  EXPECT_GT(fam.ell, 16);
  EXPECT_GE(fam.N(), required_packing_size(fam.ell));
  EXPECT_TRUE(fam.packing.verify());
  EXPECT_TRUE(fam.g_norms_ok());
  EXPECT_TRUE(fam.separation_holds());
  EXPECT_TRUE(fam.kl_chain_holds());
  for (Eigen::Index i = 0; i < fam.pairwise_h1_gaps.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) EXPECT_GE(fam.pairwise_h1_gaps(i, j), eps * fam.upsilon);
}

}  // namespace

TEST(Packing, Sizes) {
  EXPECT_EQ(required_packing_size(24), 3u);
  EXPECT_EQ(required_packing_size(48), 8u);
  for (int ell : {24, 48}) {
    const SignPacking p = pack_signs(ell, 13);
    EXPECT_GE(p.count(), required_packing_size(ell));
    EXPECT_TRUE(p.verify());
    // pairwise squared distance at least ell
    const Matrix d = p.distances();
    for (Eigen::Index i = 0; i < d.rows(); ++i)
      for (Eigen::Index j = 0; j < i; ++j) EXPECT_GE(d(i, j), ell);
  }
  EXPECT_THROW(pack_signs(10, 1), ArgumentError);
}

TEST(Packing, VerifyRejectsBadSets) {
  SignPacking p = pack_signs(24, 2);
  p.vectors[1] = p.vectors[0];
  EXPECT_FALSE(p.verify());
  p = pack_signs(24, 2);
  p.vectors[0][0] = 0;
  EXPECT_FALSE(p.verify());
  p = pack_signs(24, 2);
  p.vectors.resize(1);
  EXPECT_FALSE(p.verify());
}

TEST(Kl, TwoPointExamples) {
  Vector p(2), q(2);
  p << 0.6, 0.4;
  q << 0.5, 0.5;
  EXPECT_NEAR(discrete_kl(p, q), 0.020136, 1e-6);
  EXPECT_EQ(discrete_kl(p, p), 0.0);
  Vector z(2);
  z << 1.0, 0.0;
  EXPECT_EQ(discrete_kl(p, z), std::numeric_limits<double>::infinity());
  EXPECT_NEAR(discrete_kl(z, p), std::log(1.0 / 0.6), 1e-14);
}

TEST(HardInstance, ConditionalMeanIsImage) {
  Fixture s;
  Rng rng(21);
  Vector fv(s.grid->size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = standard_normal(rng);
  const HardInstance inst = build_hard_instance(s.op, s.h2, H1Vec(s.h1, fv));
  EXPECT_NEAR(inst.J, 4.0 * s.h2.kappa() * s.h2.norm(s.op.node_design().apply(fv)), 1e-12 * inst.J);
  EXPECT_LT((inst.conditional_mean() - inst.image).cwiseAbs().maxCoeff(), 1e-12 * inst.J);
  EXPECT_LT(((inst.p_plus + inst.p_minus).array() - 1.0).abs().maxCoeff(), 1e-14);
  EXPECT_TRUE((inst.p_plus.array() >= 0.0).all());
  EXPECT_TRUE((inst.p_minus.array() >= 0.0).all());
  EXPECT_DOUBLE_EQ(inst.M_cert, 1.25 * inst.J);
  EXPECT_DOUBLE_EQ(inst.Sigma_cert, 2.0 * inst.J);
  const Eigen::Index node = 100;
  double mean = 0.0;
  const int draws = 40000;
  for (int t = 0; t < draws; ++t) mean += inst.sample_y(node, rng);
  mean /= draws;
  EXPECT_NEAR(mean, inst.image(node), 5.0 * inst.J / std::sqrt(static_cast<double>(draws)));
}

TEST(HardInstance, Rejections) {
  Fixture s;
  EXPECT_THROW(build_hard_instance(s.op, s.h2, s.fbar), ArgumentError);
  const H1Vec f = H1Vec::constant(s.h1, 1.0);
  EXPECT_THROW(build_hard_instance(s.op, s.h2, f, 2), ArgumentError);
  const double J = 4.0 * s.h2.kappa() * s.h2.norm(s.op.node_design().apply(f.values()));
  EXPECT_THROW(build_hard_instance(s.op, s.h2, f, 1, 0.5 * J), ArgumentError);
  EXPECT_NO_THROW(build_hard_instance(s.op, s.h2, f, 1, 2.0 * J));
}

TEST(HardInstance, KlMatchesPerNodeSum) {
  Fixture s;
  const H1Vec f = H1Vec::constant(s.h1, 1.0);
  const H1Vec g = H1Vec::constant(s.h1, 0.8);
  const double J = 4.0 * s.h2.kappa() * s.h2.norm(s.op.node_design().apply(f.values()));
  const HardInstance a = build_hard_instance(s.op, s.h2, f, 1, J);
  const HardInstance b = build_hard_instance(s.op, s.h2, g, 1, J);
  const Vector nu = s.grid->probability_weights();
  double want = 0.0;
  for (Eigen::Index j = 0; j < nu.size(); ++j) {
    const double pp = a.p_plus(j), pm = a.p_minus(j), qp = b.p_plus(j), qm = b.p_minus(j);
    want += nu(j) * (pp * std::log(pp / qp) + pm * std::log(pm / qm));
  }
  EXPECT_NEAR(discrete_kl(a, b, *s.grid), want, 1e-14);
  // two-atom bound with atoms bounded away from zero
  const double bound = 16.0 / (15.0 * J * J) * (nu.array() * (a.image - b.image).array().square()).sum();
  EXPECT_LE(want, bound);
}

TEST(Decay, CertifiedBoundsHold) {
  Vector t(40);
  for (int n = 1; n <= 40; ++n) t(n - 1) = (1.0 + 0.3 / n) * std::pow(n, -2.0);
  const DecayBounds d = certify_decay(t, 40);
  EXPECT_NEAR(d.b, 2.0, 0.05);
  EXPECT_EQ(d.certified_upto, 40);
  for (int n = 1; n <= 40; ++n) {
    EXPECT_LE(d.alpha * std::pow(n, -d.b), t(n - 1) * (1.0 + 1e-12));
    EXPECT_GE(d.beta * std::pow(n, -d.b), t(n - 1) * (1.0 - 1e-12));
  }
  EXPECT_THROW(certify_decay(t, 3), ArgumentError);
  EXPECT_THROW(certify_decay(t, 41), ArgumentError);
}

TEST(Decay, FamilyEll) {
  const DecayBounds d{1.0, 1.0, 2.0, 100};
  // holder r = 1/2: phi^-1(s) = s^2
  EXPECT_EQ(family_ell(IndexFunction::holder(0.5), 1.0, 0.1, d), static_cast<int>(std::floor(0.5 * std::pow(1e2, 0.5))));
  EXPECT_EQ(family_ell(IndexFunction::holder(1.0), 1.0, 0.01, d), static_cast<int>(std::floor(0.5 * 10.0)));
}

TEST(Family, LinearVolterraCoarse) {
  Fixture s;
  for (double eps : {0.1, 0.05}) {
    FamilyOptions fo;
    fo.seed = 3;
    const HardFamily fam = build_hard_family(s.op, s.h2, s.fbar, IndexFunction::holder(0.5), 12.0, eps, fo);
    check_family(fam, eps);
    EXPECT_EQ(fam.upsilon, 1.0);
  }
}

TEST(Family, LinearVolterraFine) {
  Fixture s(512);
  FamilyOptions fo;
  fo.seed = 3;
  const HardFamily fam = build_hard_family(s.op, s.h2, s.fbar, IndexFunction::holder(0.5), 12.0, 0.02, fo);
  check_family(fam, 0.02);
}

TEST(Family, Rejections) {
  Fixture s;
  EXPECT_THROW(build_hard_family(s.op, s.h2, s.fbar, IndexFunction::log_type(1, 1.0, 1.0), 12.0, 0.1), ArgumentError);
  EXPECT_THROW(build_hard_family(s.op, s.h2, s.fbar, IndexFunction::holder(0.5), -1.0, 0.1), ArgumentError);
  EXPECT_THROW(build_hard_family(s.op, s.h2, s.fbar, IndexFunction::holder(0.5), 12.0, 0.0), ArgumentError);
}

TEST(Hs, LipschitzChecks) {
  Rng rng(31);
  const auto clip = [](double x) { return std::clamp(x, -1.0, 1.0); };
  const auto absf = [](double x) { return std::abs(x); };
  const Matrix F = random_symmetric(rng, 6);
  EXPECT_EQ(hs_operator_lipschitz_check(1.0, absf, F, F).lhs, 0.0);
  EXPECT_EQ(hs_operator_lipschitz_check(1.0, absf, F, F).ratio, 0.0);
  for (int t = 0; t < 100; ++t) {
    const Matrix A = random_symmetric(rng, 6), B = random_symmetric(rng, 6);
    EXPECT_TRUE(hs_operator_lipschitz_check(1.0, absf, A, B).holds);
    EXPECT_TRUE(hs_operator_lipschitz_check(1.0, clip, A, B).holds);
  }
  Matrix ns = Matrix::Identity(3, 3);
  ns(0, 1) = 1.0;
  EXPECT_THROW(hs_operator_lipschitz_check(1.0, absf, ns, ns), ArgumentError);
  EXPECT_THROW(hs_operator_lipschitz_check(1.0, absf, F, Matrix::Identity(3, 3)), ShapeError);
}

TEST(Hs, SqrtPerturbation) {
  Rng rng(32);
  Matrix B(5, 4);
  for (Eigen::Index i = 0; i < B.size(); ++i) B(i) = standard_normal(rng);
  EXPECT_EQ(hs_sqrt_perturbation_check(B, B).lhs, 0.0);
  // B^T B = (-B)^T (-B)
  EXPECT_LT(hs_sqrt_perturbation_check(B, -B).lhs, 1e-12);
  for (int t = 0; t < 100; ++t) {
    Matrix C(5, 4);
    for (Eigen::Index i = 0; i < C.size(); ++i) C(i) = standard_normal(rng);
    const HsCheck h = hs_sqrt_perturbation_check(B, C);
    EXPECT_TRUE(h.holds);
    EXPECT_LE(h.ratio, std::sqrt(2.0) + 1e-12);
  }
  EXPECT_THROW(hs_sqrt_perturbation_check(B, Matrix::Zero(4, 4)), ShapeError);
}
