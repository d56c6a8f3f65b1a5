#include <gtest/gtest.h>

#include <cmath>

#include "ddcs/baselines.hpp"
#include "ddcs/error.hpp"
#include "ddcs/sparse_recovery.hpp"
#include "test_util.hpp"

using namespace ddcs;

namespace {

void expect_kkt(const Eigen::MatrixXd& op, const Eigen::VectorXd& y, double lambda,
                const Eigen::VectorXd& theta, double tol) {
  const Eigen::VectorXd g = op.transpose() * (op * theta - y);
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if (theta[j] != 0.0)
      ASSERT_LE(std::abs(g[j] + lambda * (theta[j] > 0 ? 1.0 : -1.0)), tol);
    else
      ASSERT_LE(std::abs(g[j]), lambda + tol);
  }
}

}  // namespace

TEST(Encode, ShapeZeroAndNaiveProduct) {
  std::mt19937_64 gen(1);
  const SensingMatrix phi{ddcs_test::gaussian(13, 128, gen)};
  EXPECT_EQ(encode(phi, {Eigen::VectorXd::Zero(128), 0}).values, Eigen::VectorXd::Zero(13));
  const SignalWindow x{ddcs_test::gaussian_vec(128, gen), 0};
  const MeasurementVector y = encode(phi, x, 7);
  ASSERT_EQ(y.values.size(), 13);
  EXPECT_EQ(y.window_index, 7);
  for (int i = 0; i < 13; ++i) {
    double acc = 0.0;
    for (int j = 0; j < 128; ++j) acc += phi.matrix(i, j) * x.samples[j];
    EXPECT_NEAR(y.values[i], acc, 1e-12);
  }
  EXPECT_THROW(encode(phi, {Eigen::VectorXd::Zero(64), 0}), DimensionError);
}

TEST(Encode, Linear) {
  std::mt19937_64 gen(2);
  const SensingMatrix phi{ddcs_test::gaussian(10, 32, gen)};
  const Eigen::VectorXd a = ddcs_test::gaussian_vec(32, gen), b = ddcs_test::gaussian_vec(32, gen);
  const Eigen::VectorXd sum = encode(phi, {a + b, 0}).values;
  EXPECT_LT((sum - encode(phi, {a, 0}).values - encode(phi, {b, 0}).values).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((encode(phi, {2.5 * a, 0}).values - 2.5 * encode(phi, {a, 0}).values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Reconstruct, ExactProduct) {
  std::mt19937_64 gen(3);
  const Dictionary psi{ddcs_test::gaussian(16, 40, gen)};
  EXPECT_EQ(reconstruct(psi, {Eigen::VectorXd::Unit(40, 5)}).samples, psi.atoms.col(5));
  EXPECT_EQ(reconstruct(psi, {Eigen::VectorXd::Zero(40)}).samples, Eigen::VectorXd::Zero(16));
  const Eigen::VectorXd theta = ddcs_test::gaussian_vec(40, gen);
  const SignalWindow x = reconstruct(psi, {theta}, 256);
  EXPECT_EQ(x.source_offset, 256);
  for (int i = 0; i < 16; ++i) {
    double acc = 0.0;
    for (int j = 0; j < 40; ++j) acc += psi.atoms(i, j) * theta[j];
    EXPECT_NEAR(x.samples[i], acc, 1e-12);
  }
  EXPECT_THROW(reconstruct(psi, {Eigen::VectorXd::Zero(39)}), DimensionError);
}

TEST(Recover, ZeroMeasurementGivesZero) {
  std::mt19937_64 gen(4);
  const SensingMatrix phi{ddcs_test::gaussian(10, 20, gen)};
  const Dictionary psi{Eigen::MatrixXd::Identity(20, 20)};
  EXPECT_EQ(recover({Eigen::VectorXd::Zero(10), 0}, phi, psi, {}).coeffs, Eigen::VectorXd::Zero(20));
}

TEST(Recover, LambdaAboveThresholdGivesZero) {
  std::mt19937_64 gen(5);
  const SensingMatrix phi{ddcs_test::gaussian(10, 20, gen)};
  const Dictionary psi{Eigen::MatrixXd::Identity(20, 20)};
  const MeasurementVector y{ddcs_test::gaussian_vec(10, gen), 0};
  RecoveryConfig cfg;
  cfg.lambda_rec = (phi.matrix.transpose() * y.values).cwiseAbs().maxCoeff();
  EXPECT_EQ(recover(y, phi, psi, cfg).coeffs.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Recover, ExactRecoveryOfSparseSignal) {
  std::mt19937_64 gen(6);
  const Dictionary psi{Eigen::MatrixXd::Identity(128, 128)};
  int good = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const SensingMatrix phi = gaussian_phi(40, 128, 1000 + trial);
    const Eigen::VectorXd truth = ddcs_test::sparse_vec(128, 5, gen);
    const MeasurementVector y = encode(phi, {truth, 0});
    RecoveryConfig cfg;
    cfg.lambda_rec = 1e-6 * (phi.matrix.transpose() * y.values).cwiseAbs().maxCoeff();
    cfg.max_iter = 50000;
    const Eigen::VectorXd theta = recover(y, phi, psi, cfg).coeffs;
    good += (theta - truth).norm() / truth.norm() <= 1e-3;
  }
  EXPECT_GE(good, 19);
}

TEST(Recover, KktCertificateAndAutoLambda) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    const SensingMatrix phi{ddcs_test::gaussian(20, 48, gen)};
    const Dictionary psi{ddcs_test::unit_columns(ddcs_test::gaussian(48, 96, gen))};
    const MeasurementVector y{ddcs_test::gaussian_vec(20, gen), 0};
    RecoveryConfig cfg;
    cfg.max_iter = 20000;
    const RecoveryResult r = recover_detailed(y, phi, psi, cfg);
    const Eigen::MatrixXd op = phi.matrix * psi.atoms;
    EXPECT_NEAR(r.lambda, 0.01 * (op.transpose() * y.values).cwiseAbs().maxCoeff(), 1e-15);
    expect_kkt(op, y.values, r.lambda, r.theta.coeffs, 1e-5);
    EXPECT_NEAR(r.residual_norm, (y.values - op * r.theta.coeffs).norm(), 1e-12);
    for (std::size_t i = 1; i < r.solver.history.size(); ++i)
      ASSERT_LE(r.solver.history[i], r.solver.history[i - 1]);
  }
}

TEST(Recover, RejectsBadInput) {
  const SensingMatrix phi{Eigen::MatrixXd::Ones(3, 5)};
  const Dictionary psi{Eigen::MatrixXd::Identity(5, 5)};
  EXPECT_THROW(recover({Eigen::VectorXd::Ones(4), 0}, phi, psi, {}), DimensionError);
  Eigen::VectorXd bad = Eigen::VectorXd::Ones(3);
  bad[1] = INFINITY;
  EXPECT_THROW(recover({bad, 0}, phi, psi, {}), NumericError);
  EXPECT_THROW(recover({Eigen::VectorXd::Ones(3), 0}, SensingMatrix{Eigen::MatrixXd::Zero(3, 5)}, psi, {}),
               NumericError);
}

TEST(MeasurementNoise, SnrAndDeterminism) {
  MeasurementVector y{Eigen::VectorXd::Constant(20000, 2.0), 0};
  MeasurementVector a = y, b = y;
  add_measurement_noise(a, 20.0, 5);
  add_measurement_noise(b, 20.0, 5);
  EXPECT_EQ(a.values, b.values);
  const double noise_power = (a.values - y.values).squaredNorm() / 20000;
  EXPECT_NEAR(10 * std::log10(4.0 / noise_power), 20.0, 0.2);
}

TEST(MeasurementFile, RoundTripAndLayout) {
  ddcs_test::TempDir dir;
  std::mt19937_64 gen(8);
  std::vector<MeasurementVector> ys;
  for (int i = 0; i < 4; ++i) ys.push_back({ddcs_test::gaussian_vec(13, gen), i});
  const std::string bytes = serialize_measurements(ys);
  EXPECT_EQ(bytes.substr(0, 4), "DDCM");
  EXPECT_EQ(bytes.size(), 16u + 4 * 13 * 8);
  save_measurements(ys, dir / "y.ddcm");
  const auto back = load_measurements(dir / "y.ddcm");
  ASSERT_EQ(back.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(back[i].values, ys[i].values);
    EXPECT_EQ(back[i].window_index, i);
  }
  EXPECT_THROW(parse_measurements(bytes.substr(0, 20)), FormatError);
  EXPECT_THROW(parse_measurements("DDCW" + bytes.substr(4)), FormatError);
}
