#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nlinv/errors.hpp"
#include "nlinv/experiments.hpp"
#include "nlinv/rng.hpp"
#include "nlinv/tikhonov.hpp"

using namespace nlinv;

namespace {

struct Fixture {
  GridPtr grid = make_trapezoid_grid({0.0, 1.0}, 64, true);
  H1SpacePtr h1 = H1Space::weighted_l2(grid);
  std::shared_ptr<H2Space> h2 = std::make_shared<H2Space>(Kernel::sobolev1d(1), grid);
};

SampleSet noisy(const ForwardOp& op, const H1Vec& f, int m, double sigma, std::uint64_t seed) {
  return simulate(op, f, m, sigma, seed);
}

H1Vec smooth(const H1SpacePtr& sp, double base, double amp) {
  Vector v = sp->grid().nodes;
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = base + amp * std::sin(std::numbers::pi * v(i));
  return H1Vec(sp, v);
}

}  // namespace

TEST(Objective, ZeroAtTruthWithNoiselessData) {
  Fixture s;
  const ForwardOp op = ForwardOp::quadratic_integral(s.h1, Theta::named("volterra"));
  const H1Vec fbar = smooth(s.h1, 2.0, 0.3);
  const SampleSet d = noisy(op, fbar, 50, 0.0, 1);
  EXPECT_EQ(tikhonov_objective(op, d, fbar, fbar, 0.1), 0.0);
}

TEST(Objective, DiagnosticsAllowsZeroLambda) {
  Fixture s;
  const ForwardOp op = ForwardOp::linear_integral(s.h1, Theta::named("volterra"));
  const H1Vec f = smooth(s.h1, 1.0, 0.5), fbar = H1Vec::zeros(s.h1);
  const SampleSet d = noisy(op, f, 40, 0.1, 2);
  EXPECT_THROW(tikhonov_objective(op, d, f, fbar, 0.0), ArgumentError);
  const double misfit = tikhonov_objective(op, d, f, fbar, 0.0, true);
  const Vector r = op.apply(f, d.x) - Eigen::Map<const Vector>(d.y.data(), 40);
  EXPECT_NEAR(misfit, r.squaredNorm() / 40.0, 1e-15);
}

TEST(Objective, MatchesNaiveSummation) {
  Fixture s;
  const ForwardOp op = ForwardOp::quadratic_integral(s.h1, Theta::named("gaussian"));
  Rng rng(3);
  for (int t = 0; t < 5; ++t) {
    Vector fv(64), bv(64);
    for (Eigen::Index i = 0; i < 64; ++i) {
      fv(i) = standard_normal(rng);
      bv(i) = 1.0 + uniform01(rng);
    }
    const H1Vec f(s.h1, fv), fbar(s.h1, bv);
    const SampleSet d = noisy(op, f, 30, 0.2, 10 + t);
    const double lambda = 0.05;
    double misfit = 0.0;
    for (std::size_t i = 0; i < d.m(); ++i) {
      double a = 0.0;
      for (Eigen::Index j = 0; j < 64; ++j)
        a += std::exp(-std::pow(d.x[i] - s.grid->nodes(j), 2)) * s.grid->weights(j) * fv(j) * fv(j);
      misfit += (a - d.y[i]) * (a - d.y[i]);
    }
    double pen = 0.0;
    for (Eigen::Index j = 0; j < 64; ++j) pen += s.grid->weights(j) * (fv(j) - bv(j)) * (fv(j) - bv(j));
    const double want = misfit / d.m() + lambda * pen;
    EXPECT_NEAR(tikhonov_objective(op, d, f, fbar, lambda), want, 1e-12 * std::max(1.0, want));
  }
}

TEST(Solve, PenaltyDominatedLimit) {
  Fixture s;
  const ForwardOp op = ForwardOp::quadratic_integral(s.h1, Theta::named("volterra"));
  const H1Vec fbar = H1Vec::constant(s.h1, 1.0);
  const SampleSet d = noisy(op, smooth(s.h1, 2.0, 0.5), 80, 0.1, 4);
  const TikhonovFit fit = tikhonov_solve(op, d, fbar, 1e6);
  EXPECT_TRUE(fit.converged);
  EXPECT_LE(norm(fit.solution - fbar), 1e-3);
}

TEST(Solve, NoiselessRecoveryAtTinyLambda) {
  Fixture s;
  const ForwardOp op = ForwardOp::quadratic_integral(s.h1, Theta::named("volterra"));
  const H1Vec f_rho = smooth(s.h1, 2.0, 0.05);
  const H1Vec fbar = smooth(s.h1, 2.0, 0.045);
  const SampleSet d = noisy(op, f_rho, 400, 0.0, 5);
  const TikhonovFit fit = tikhonov_solve(op, d, fbar, 1e-8);
  EXPECT_TRUE(fit.converged) << fit.message;
  EXPECT_LE(norm(fit.solution - f_rho), 1e-3);
}

TEST(Solve, LinearOperatorsTakeOneStepAndMatchNormalEquations) {
  Fixture s;
  for (const ForwardOp& op :
       {ForwardOp::linear_integral(s.h1, Theta::named("volterra")), ForwardOp::identity(s.h1, s.h2)}) {
    const H1Vec fbar = smooth(s.h1, 0.2, 0.1);
    const SampleSet d = noisy(op, smooth(s.h1, 1.0, 1.0), 120, 0.05, 6);
    const double lambda = 1e-3;
    const TikhonovFit fit = tikhonov_solve(op, d, fbar, lambda);
    EXPECT_TRUE(fit.converged);
    EXPECT_EQ(fit.gn_iters, 1);
    const Matrix p = op.design(d.x).phi;
    const Vector y = Eigen::Map<const Vector>(d.y.data(), 120);
    const Matrix w = s.h1->gram_form();
    const Matrix a = p.transpose() * p / 120.0 + lambda * w;
    const Vector rhs = p.transpose() * y / 120.0 + lambda * w * fbar.values();
    const H1Vec ref(s.h1, a.fullPivLu().solve(rhs));
    EXPECT_LE(norm(fit.solution - ref), 1e-8);
  }
}

TEST(Solve, AcceptedStepsDecreaseObjective) {
  Fixture s;
  const ForwardOp op = ForwardOp::quadratic_integral(s.h1, Theta::named("volterra"));
  const H1Vec fbar = H1Vec::constant(s.h1, 1.0);
  const SampleSet d = noisy(op, smooth(s.h1, 2.0, 1.0), 200, 0.1, 7);
  const TikhonovFit fit = tikhonov_solve(op, d, fbar, 1e-3);
  EXPECT_TRUE(fit.converged);
  ASSERT_EQ(fit.objective_trace.size(), static_cast<std::size_t>(fit.gn_iters) + 1);
  for (std::size_t i = 1; i < fit.objective_trace.size(); ++i)
    EXPECT_LT(fit.objective_trace[i], fit.objective_trace[i - 1]);
  EXPECT_NEAR(fit.objective_trace.back(), tikhonov_objective(op, d, fit.solution, fbar, 1e-3), 1e-12);
}

TEST(Solve, DistanceToFbarShrinksWithLambda) {
  Fixture s;
  const ForwardOp op = ForwardOp::quadratic_integral(s.h1, Theta::named("volterra"));
  const H1Vec fbar = H1Vec::constant(s.h1, 2.0);
  const SampleSet d = noisy(op, smooth(s.h1, 2.0, 0.4), 150, 0.05, 8);
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10; ++i) {
    const double lambda = std::pow(10.0, -5.0 + 0.6 * i);
    const TikhonovFit fit = tikhonov_solve(op, d, fbar, lambda);
    ASSERT_TRUE(fit.converged);
    const double dist = norm(fit.solution - fbar);
    EXPECT_LE(dist, prev * (1.0 + 1e-9));
    prev = dist;
  }
}

TEST(Solve, MultistartRecordsObjectives) {
  Fixture s;
  const ForwardOp op = ForwardOp::quadratic_integral(s.h1, Theta::named("volterra"));
  const H1Vec fbar = H1Vec::constant(s.h1, 2.0);
  const SampleSet d = noisy(op, smooth(s.h1, 2.0, 0.2), 100, 0.05, 9);
  SolveOptions o;
  o.multistart = 5;
  const TikhonovFit fit = tikhonov_solve(op, d, fbar, 1e-3, o);
  EXPECT_EQ(fit.multistart_objectives.size(), 6u);
  for (double v : fit.multistart_objectives) EXPECT_GE(v, fit.objective_trace.back() - 1e-12);
}

TEST(Solve, InputValidation) {
  Fixture s;
  const ForwardOp op = ForwardOp::quadratic_integral(s.h1, Theta::named("volterra"));
  const SampleSet d = noisy(op, H1Vec::constant(s.h1, 1.0), 10, 0.1, 1);
  EXPECT_THROW(tikhonov_solve(op, d, H1Vec::constant(s.h1, 1.0), -1.0), ArgumentError);
  EXPECT_THROW(tikhonov_solve(op, d, H1Vec::constant(s.h1, -1.0), 0.1), DomainError);
  const H1SpacePtr other = H1Space::weighted_l2(make_trapezoid_grid({0, 1}, 32, true));
  EXPECT_THROW(tikhonov_solve(op, d, H1Vec::constant(other, 1.0), 0.1), ShapeError);
}

TEST(PopulationSolution, Limits) {
  Fixture s;
  const ForwardOp op = ForwardOp::quadratic_integral(s.h1, Theta::named("volterra"));
  const H1Vec fbar = H1Vec::constant(s.h1, 2.0);
  const Matrix T = population_T(op, fbar);
  EXPECT_LE(norm(population_linearized_solution(T, fbar, fbar, 0.1) - fbar), 1e-12 * norm(fbar));
  const H1Vec f_rho = smooth(s.h1, 2.0, 1.0);
  const double big = 1e9 * spectral_norm(T);
  EXPECT_LE(norm(population_linearized_solution(T, f_rho, fbar, big) - fbar), 1e-8 * norm(f_rho - fbar));
}

TEST(PopulationSolution, ApproximationErrorBound) {
  Fixture s;
  const ForwardOp op = ForwardOp::quadratic_integral(s.h1, Theta::named("volterra"));
  const H1Vec fbar = H1Vec::constant(s.h1, 2.0);
  Rng rng(12);
  std::vector<double> xs(400);
  for (double& x : xs) x = uniform01(rng);
  const Matrix T = linearize(op, fbar, xs).T_x;
  for (double r : {0.5, 1.0}) {
    Vector g(64);
    for (Eigen::Index i = 0; i < 64; ++i) g(i) = standard_normal(rng);
    const Vector u_rho = apply_index_function(T, IndexFunction::holder(r, 1e6)) * g;
    for (int i = 0; i < 20; ++i) {
      const double lambda = std::pow(10.0, -6.0 + 0.3 * i);
      const Vector u = population_linearized_solution(T, u_rho, Vector::Zero(64), lambda);
      EXPECT_LE((u - u_rho).norm(), g.norm() * std::pow(lambda, r) * (1.0 + 1e-10));
    }
  }
}

TEST(IndexFunction, HolderAndLogType) {
  const IndexFunction h = IndexFunction::holder(0.5);
  EXPECT_DOUBLE_EQ(h(0.25), 0.5);
  EXPECT_DOUBLE_EQ(h.inverse(0.5), 0.25);
  EXPECT_TRUE(h.is_index_function());
  EXPECT_TRUE(h.upper_rate_hypotheses_hold(1e-6, 1.0));
  EXPECT_FALSE(IndexFunction::holder(1.5).upper_rate_hypotheses_hold(1e-6, 1.0));
  const IndexFunction l = IndexFunction::log_type(1, 0.5, 0.5);
  EXPECT_EQ(l(0.0), 0.0);
  EXPECT_NEAR(l(0.1), 0.1 / std::sqrt(std::log(10.0)), 1e-15);
  EXPECT_NEAR(l(l.inverse(0.05)), 0.05, 1e-12);
  EXPECT_TRUE(l.is_index_function());
  EXPECT_THROW(IndexFunction::log_type(1, 0.5, 1.5), ArgumentError);
  EXPECT_THROW(IndexFunction::holder(-1.0), ArgumentError);
}

TEST(LambdaChoice, Examples) {
  EXPECT_NEAR(lambda_choice(729, IndexFunction::holder(0.5)).lambda, 1.0 / 9.0, 1e-12);
  EXPECT_NEAR(lambda_choice(1024, IndexFunction::holder(0.5), 2.0).lambda, 0.0625, 1e-12);
  const LambdaChoice sat = lambda_choice(1, IndexFunction::holder(0.5, 0.5));
  EXPECT_TRUE(sat.saturated);
  EXPECT_EQ(sat.lambda, 0.5);
}

TEST(LambdaChoice, MatchesClosedForm) {
  for (double r : {0.5, 0.75, 1.0})
    for (double b : {1.5, 2.0, 4.0})
      for (double m : {1e2, 1e3, 1e4}) {
        const double want = std::pow(m, -b / (2 * b * r + b + 1));
        EXPECT_NEAR(lambda_choice(m, IndexFunction::holder(r), b).lambda, want, 1e-8 * want);
      }
}

TEST(RateExponents, Formulae) {
  EXPECT_NEAR(rate_exponents(0.5, 2.0).h1_exponent, 0.2, 1e-15);
  EXPECT_NEAR(rate_exponents(1.0, 2.0).h1_exponent, 2.0 / 7.0, 1e-15);
  EXPECT_NEAR(rate_exponents(0.5, 2.0).prediction_exponent, 0.4, 1e-15);
  EXPECT_FALSE(rate_exponents(0.5, 2.0).outside_theory);
  EXPECT_TRUE(rate_exponents(2.0, 2.0).saturated);
  EXPECT_TRUE(rate_exponents(2.0, 2.0).outside_theory);
}

TEST(Smallness, Examples) {
  EXPECT_TRUE(smallness_check(0.0, 123.0));
  EXPECT_TRUE(smallness_check(0.4, 1.0));
  EXPECT_FALSE(smallness_check(0.5, 1.0));
}
