#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace uwsr;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) { return random_matrix(n, 1, seed); }

SolveOptions tight() {
  SolveOptions o;
  o.tolerance = 1e-13;
  o.max_iterations = 500;
  return o;
}

double objective(const Eigen::MatrixXd& b, const Eigen::VectorXd& rhs, const Eigen::VectorXd& gamma,
                 const Eigen::VectorXd& mu) {
  return (b * mu - rhs).squaredNorm() + mu.dot(gamma.cwiseProduct(mu));
}

}  // namespace

TEST(MinimalNorm, IdentitySystem) {
  const Eigen::VectorXd b = random_vector(3, 1);
  const SolveResult r = solve_minimal_norm(Eigen::MatrixXd::Identity(3, 3), b, Eigen::VectorXd::Zero(3), tight());
  EXPECT_LT((r.mu - b).norm(), 1e-12);
  EXPECT_EQ(r.report.path, SolvePath::MinimalNorm);
  EXPECT_FALSE(r.report.hit_iteration_cap);
}

TEST(MinimalNorm, DenseOracle) {
  const Eigen::MatrixXd b = random_matrix(4, 6, 2);
  const Eigen::VectorXd rhs = random_vector(4, 3);
  const Eigen::VectorXd gamma = Eigen::VectorXd::Constant(4, 0.01);
  const SolveResult r = solve_minimal_norm(b, rhs, gamma, tight());
  const Eigen::MatrixXd k = b * b.transpose() + Eigen::MatrixXd(gamma.asDiagonal());
  const Eigen::VectorXd oracle = b.transpose() * k.ldlt().solve(rhs);
  EXPECT_LT((r.mu - oracle).norm(), 1e-8);
}

TEST(MinimalNorm, OrthonormalRowsConvergeQuickly) {
  const Eigen::MatrixXd q = random_matrix(6, 6, 4).householderQr().householderQ();
  const Eigen::MatrixXd b = q.topRows(3);
  const Eigen::VectorXd rhs = random_vector(3, 5);
  const SolveResult r = solve_minimal_norm(b, rhs, Eigen::VectorXd::Zero(3), tight());
  EXPECT_LT((r.mu - b.transpose() * rhs).norm(), 1e-10);
  EXPECT_LE(r.report.iterations, 2);
}

TEST(MinimalNorm, KktResidualWithinTolerance) {
  const Eigen::MatrixXd b = random_matrix(8, 20, 6);
  const Eigen::VectorXd rhs = random_vector(8, 7);
  const Eigen::VectorXd gamma = Eigen::VectorXd::Constant(8, 0.5);
  SolveOptions o;
  o.tolerance = 1e-9;
  const GramOperator op(b, gamma, true);
  const CgResult cg = conjugate_gradient(op, rhs, op.diagonal(), o);
  EXPECT_TRUE(cg.converged);
  EXPECT_LE((op(cg.x) - rhs).norm() / rhs.norm(), 1e-9);
}

TEST(LeastSquares, SquareInvertible) {
  const Eigen::MatrixXd b = random_matrix(5, 5, 8) + 5.0 * Eigen::MatrixXd::Identity(5, 5);
  const Eigen::VectorXd rhs = random_vector(5, 9);
  const SolveResult r = solve_least_squares(b, rhs, Eigen::VectorXd::Zero(5), tight());
  EXPECT_LT((r.mu - b.lu().solve(rhs)).norm(), 1e-8);
  EXPECT_EQ(r.report.path, SolvePath::LeastSquares);
}

TEST(LeastSquares, DenseOracle) {
  const Eigen::MatrixXd b = random_matrix(9, 6, 10);
  const Eigen::VectorXd rhs = random_vector(9, 11);
  const Eigen::VectorXd gamma = Eigen::VectorXd::Constant(6, 0.01);
  const SolveResult r = solve_least_squares(b, rhs, gamma, tight());
  const Eigen::MatrixXd k = b.transpose() * b + Eigen::MatrixXd(gamma.asDiagonal());
  EXPECT_LT((r.mu - k.ldlt().solve(b.transpose() * rhs)).norm(), 1e-8);
}

TEST(LeastSquares, RidgeShrinksSolution) {
  const Eigen::MatrixXd b = random_matrix(9, 6, 12);
  const Eigen::VectorXd rhs = random_vector(9, 13);
  const Eigen::VectorXd gamma = regularization_diagonal(b, 0.05, RegularizationSource::Columns);
  const double n1 = solve_least_squares(b, rhs, gamma, tight()).mu.norm();
  const double n2 = solve_least_squares(b, rhs, 10.0 * gamma, tight()).mu.norm();
  EXPECT_LT(n2, n1);
}

TEST(LeastSquares, OptimalityCertificate) {
  const Eigen::MatrixXd b = random_matrix(12, 8, 14);
  const Eigen::VectorXd rhs = random_vector(12, 15);
  const Eigen::VectorXd gamma = regularization_diagonal(b, 0.1, RegularizationSource::Columns);
  const Eigen::VectorXd mu = solve_least_squares(b, rhs, gamma, tight()).mu;
  const double best = objective(b, rhs, gamma, mu);
  std::mt19937_64 rng(16);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd d(mu.size());
    for (auto& v : d) v = g(rng);
    d *= 1e-3 * mu.norm() / d.norm();
    EXPECT_LE(best, objective(b, rhs, gamma, mu + d));
  }
}

TEST(Paths, PushThroughIdentity) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Eigen::MatrixXd b = random_matrix(7, 11, 20 + s);
    const Eigen::VectorXd rhs = random_vector(7, 30 + s);
    const double lambda = 0.3;
    const Eigen::VectorXd a = solve_minimal_norm(b, rhs, Eigen::VectorXd::Constant(7, lambda), tight()).mu;
    const Eigen::VectorXd c = solve_least_squares(b, rhs, Eigen::VectorXd::Constant(11, lambda), tight()).mu;
    EXPECT_LT((a - c).norm(), 1e-7);
  }
}

TEST(Paths, GramOperatorIsSymmetric) {
  const Eigen::MatrixXd b = random_matrix(10, 15, 40);
  for (bool rows : {true, false}) {
    const Eigen::Index n = rows ? 10 : 15;
    const Eigen::VectorXd gamma = Eigen::VectorXd::LinSpaced(n, 0.1, 2.0);
    const GramOperator op(b, gamma, rows);
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Eigen::VectorXd x = random_vector(n, 50 + s), y = random_vector(n, 60 + s);
      EXPECT_NEAR(op(x).dot(y), x.dot(op(y)), 1e-10);
    }
    const Eigen::MatrixXd dense = rows ? Eigen::MatrixXd(b * b.transpose()) : Eigen::MatrixXd(b.transpose() * b);
    EXPECT_LT((op.diagonal() - (dense.diagonal() + gamma)).norm(), 1e-12);
  }
  EXPECT_THROW(GramOperator(b, Eigen::VectorXd::Zero(3), true), std::invalid_argument);
}

TEST(Paths, ChoosePath) {
  EXPECT_EQ(choose_path(30, 30), SolvePath::LeastSquares);
  EXPECT_EQ(choose_path(31, 30), SolvePath::LeastSquares);
  EXPECT_EQ(choose_path(29, 30), SolvePath::MinimalNorm);
  EXPECT_EQ(parse_solve_path("min-norm"), SolvePath::MinimalNorm);
  EXPECT_EQ(parse_solve_path("lsq"), SolvePath::LeastSquares);
  EXPECT_THROW(parse_solve_path("qr"), ParseError);
  EXPECT_EQ(parse_regularization_source("rows"), RegularizationSource::Rows);
  EXPECT_THROW(parse_regularization_source("both"), ParseError);
  EXPECT_EQ(resolve_source(RegularizationSource::Auto, SolvePath::LeastSquares), RegularizationSource::Columns);
  EXPECT_EQ(resolve_source(RegularizationSource::Auto, SolvePath::MinimalNorm), RegularizationSource::Rows);
}

TEST(ConjugateGradient, BreakdownOnIndefiniteOperator) {
  const Eigen::MatrixXd a = Eigen::Vector3d(1.0, -1.0, 1.0).asDiagonal();
  auto op = [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(a * v); };
  EXPECT_THROW(conjugate_gradient(op, Eigen::Vector3d(0.0, 1.0, 0.0), Eigen::Vector3d::Ones(), tight()), NumericError);
}

TEST(ConjugateGradient, IterationCapFlag) {
  const Eigen::MatrixXd b = random_matrix(40, 40, 70);
  const Eigen::VectorXd rhs = random_vector(40, 71);
  SolveOptions o;
  o.max_iterations = 2;
  const SolveResult r = solve_least_squares(b, rhs, Eigen::VectorXd::Zero(40), o);
  EXPECT_TRUE(r.report.hit_iteration_cap);
  EXPECT_EQ(r.report.iterations, 2);
  EXPECT_GT(r.report.relative_residual, o.tolerance);
}

TEST(ConjugateGradient, ZeroRhsAndValidation) {
  const Eigen::MatrixXd b = random_matrix(3, 3, 80);
  const SolveResult r = solve_least_squares(b, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3));
  EXPECT_EQ(r.mu, Eigen::VectorXd::Zero(3));
  SolveOptions bad;
  bad.tolerance = 0.0;
  EXPECT_THROW(solve_least_squares(b, Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(3), bad), std::invalid_argument);
  EXPECT_THROW(solve_least_squares(b, Eigen::VectorXd::Ones(4), Eigen::VectorXd::Ones(3)), std::invalid_argument);
  const Eigen::Vector3d nan(std::nan(""), 0.0, 0.0);
  EXPECT_THROW(solve_least_squares(b, nan, Eigen::VectorXd::Ones(3)), NumericError);
}

TEST(Solve, SystemPathsAndRegularization) {
  ConstraintSystem sys;
  sys.matrix = random_matrix(12, 9, 90);
  sys.rhs = random_vector(12, 91);
  sys.points = 3;
  SolverConfig cfg;
  cfg.cg = tight();
  const SolveResult auto_path = solve(sys, cfg);
  EXPECT_EQ(auto_path.report.path, SolvePath::LeastSquares);
  const double factor = regularization_factor(cfg.regularization, 3);
  EXPECT_DOUBLE_EQ(factor, 2.0 * 10.0 * 3.0 * 2.5e-5);
  const Eigen::VectorXd gamma = factor * sys.matrix.colwise().squaredNorm().transpose();
  const Eigen::MatrixXd k = sys.matrix.transpose() * sys.matrix + Eigen::MatrixXd(gamma.asDiagonal());
  EXPECT_LT((auto_path.mu - k.ldlt().solve(sys.matrix.transpose() * sys.rhs)).norm(), 1e-8);

  cfg.force_path = SolvePath::MinimalNorm;
  EXPECT_EQ(solve(sys, cfg).report.path, SolvePath::MinimalNorm);
  cfg.regularization.source = RegularizationSource::Columns;
  EXPECT_THROW(solve(sys, cfg), std::invalid_argument);
  cfg.regularization.source = RegularizationSource::Auto;
  cfg.regularization.alpha = -1.0;
  EXPECT_THROW(solve(sys, cfg), std::invalid_argument);
}
