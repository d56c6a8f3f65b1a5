#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/SVD>

#include "ddcs/error.hpp"
#include "ddcs/lasso.hpp"
#include "test_util.hpp"

using namespace ddcs;

namespace {

// Subgradient optimality written out coordinate by coordinate.
void expect_kkt(const Eigen::MatrixXd& op, const Eigen::VectorXd& y, double lambda,
                const Eigen::VectorXd& theta, double tol) {
  const Eigen::VectorXd g = op.transpose() * (op * theta - y);
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if (theta[j] != 0.0)
      ASSERT_LE(std::abs(g[j] + lambda * (theta[j] > 0 ? 1.0 : -1.0)), tol) << "support " << j;
    else
      ASSERT_LE(std::abs(g[j]), lambda + tol) << "off support " << j;
  }
}

// Cyclic coordinate descent run to a tight tolerance.
Eigen::VectorXd coordinate_descent(const Eigen::MatrixXd& op, const Eigen::VectorXd& y, double lambda) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(op.cols());
  Eigen::VectorXd r = y;
  const Eigen::VectorXd col_sq = op.colwise().squaredNorm();
  for (int sweep = 0; sweep < 20000; ++sweep) {
    double change = 0.0;
    for (Eigen::Index j = 0; j < op.cols(); ++j) {
      if (col_sq[j] == 0.0) continue;
      const double rho = op.col(j).dot(r) + col_sq[j] * theta[j];
      const double next = std::copysign(std::max(std::abs(rho) - lambda, 0.0), rho) / col_sq[j];
      const double d = next - theta[j];
      if (d != 0.0) {
        r -= d * op.col(j);
        theta[j] = next;
        change = std::max(change, std::abs(d));
      }
    }
    if (change < 1e-14) break;
  }
  return theta;
}

}  // namespace

TEST(Lasso, ScalarClosedForm) {
  const Eigen::MatrixXd op = Eigen::MatrixXd::Constant(1, 1, 1.0);
  for (auto [x, lambda] : {std::pair{2.0, 0.5}, {-3.0, 1.0}, {0.25, 0.5}}) {
    const auto r = solve_lasso(op, Eigen::VectorXd::Constant(1, x), lambda);
    const double expected = std::copysign(std::max(std::abs(x) - lambda, 0.0), x);
    EXPECT_NEAR(r.theta[0], expected, 1e-9);
  }
}

TEST(Lasso, LargeLambdaGivesZero) {
  std::mt19937_64 gen(1);
  const Eigen::MatrixXd op = ddcs_test::gaussian(20, 40, gen);
  const Eigen::VectorXd y = ddcs_test::gaussian_vec(20, gen);
  const double lmax = (op.transpose() * y).cwiseAbs().maxCoeff();
  const auto r = solve_lasso(op, y, lmax);
  EXPECT_EQ(r.theta.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(solve_lasso(op, y, 2 * lmax).theta.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Lasso, OrthonormalSoftThreshold) {
  std::mt19937_64 gen(2);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(ddcs_test::gaussian(32, 32, gen))
                                .householderQ();
  const Eigen::VectorXd y = ddcs_test::gaussian_vec(32, gen);
  const Eigen::VectorXd c = q.transpose() * y;
  for (double lambda : {0.3, 1e-9}) {
    const auto r = solve_lasso(q, y, lambda);
    Eigen::VectorXd expected(32);
    for (int j = 0; j < 32; ++j) expected[j] = std::copysign(std::max(std::abs(c[j]) - lambda, 0.0), c[j]);
    EXPECT_LT((r.theta - expected).cwiseAbs().maxCoeff(), 1e-9) << lambda;
  }
  EXPECT_LT((solve_lasso(q, y, 1e-9).theta - c).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Lasso, KktAndAgreementWithCoordinateDescent) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 10 + trial % 20, k = 20 + (trial * 7) % 40;
    const Eigen::MatrixXd op = ddcs_test::gaussian(m, k, gen);
    const Eigen::VectorXd y = ddcs_test::gaussian_vec(m, gen);
    const double lambda = 0.05 * (1 + trial % 5) * (op.transpose() * y).cwiseAbs().maxCoeff();
    const auto r = solve_lasso(op, y, lambda);
    EXPECT_TRUE(r.converged);
    expect_kkt(op, y, lambda, r.theta, 1e-5);
    EXPECT_LE(r.kkt_residual, 1e-5);
    EXPECT_NEAR(r.kkt_residual, lasso_kkt_residual(op, y, lambda, r.theta), 1e-12);
    const Eigen::VectorXd cd = coordinate_descent(op, y, lambda);
    const double f_cd = lasso_objective(op, y, lambda, cd);
    EXPECT_LE(r.objective, f_cd + 1e-9 * std::max(1.0, f_cd));
    EXPECT_NEAR(r.objective, lasso_objective(op, y, lambda, r.theta), 1e-12);
  }
}

TEST(Lasso, ObjectiveNonIncreasing) {
  std::mt19937_64 gen(4);
  LassoOptions opts;
  opts.record_history = true;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd op = ddcs_test::gaussian(30, 90, gen);
    const Eigen::VectorXd y = ddcs_test::gaussian_vec(30, gen);
    const auto r = solve_lasso(op, y, 0.01 * (op.transpose() * y).cwiseAbs().maxCoeff(), opts);
    ASSERT_GE(r.history.size(), 1u);
    for (std::size_t i = 1; i < r.history.size(); ++i) ASSERT_LE(r.history[i], r.history[i - 1]);
  }
}

TEST(Lasso, ObjectiveFormula) {
  Eigen::MatrixXd op(2, 2);
  op << 1, 2, 3, 4;
  const Eigen::Vector2d y(1, 1), theta(0.5, -1);
  // residual = y - op*theta = (1 - (0.5 - 2), 1 - (1.5 - 4)) = (2.5, 3.5)
  EXPECT_NEAR(lasso_objective(op, y, 0.2, theta), 0.5 * (6.25 + 12.25) + 0.2 * 1.5, 1e-15);
}

TEST(SpectralNorm, MatchesSvd) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd op = ddcs_test::gaussian(15 + trial, 40, gen);
    const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(op).singularValues()[0];
    EXPECT_NEAR(spectral_norm_sq(op, 1e-8), s * s, 1e-4 * s * s);
  }
  EXPECT_THROW(spectral_norm_sq(Eigen::MatrixXd::Zero(3, 4)), NumericError);
}
