#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ddcs/baselines.hpp"
#include "ddcs/error.hpp"
#include "ddcs/odl.hpp"
#include "test_util.hpp"

using namespace ddcs;

TEST(GaussianPhi, DeterministicWithExpectedMoments) {
  const SensingMatrix a = gaussian_phi(64, 128, 42);
  EXPECT_EQ(a.matrix, gaussian_phi(64, 128, 42).matrix);
  EXPECT_NE(a.matrix, gaussian_phi(64, 128, 43).matrix);
  const double count = 64.0 * 128.0;
  const double sigma = std::sqrt(1.0 / 64.0);
  const double mean = a.matrix.mean();
  EXPECT_LE(std::abs(mean), 4.0 * sigma / std::sqrt(count));
  const double var = (a.matrix.array() - mean).square().sum() / (count - 1);
  EXPECT_NEAR(var, 1.0 / 64.0, 0.1 / 64.0);
  EXPECT_THROW(gaussian_phi(128, 128, 1), DimensionError);
  EXPECT_THROW(gaussian_phi(0, 128, 1), DimensionError);
}

TEST(Dct, OrthonormalWithClosedFormEntries) {
  const Eigen::MatrixXd d = dct_basis(128);
  EXPECT_LT((d.transpose() * d - Eigen::MatrixXd::Identity(128, 128)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((d.col(0).array() - 1.0 / std::sqrt(128.0)).abs().maxCoeff(), 1e-15);
  EXPECT_NEAR(dct_basis(4)(1, 1), std::sqrt(2.0 / 4.0) * std::cos(3.0 * std::numbers::pi / 8.0), 1e-15);
}

TEST(Dwt, HaarTwoPoint) {
  const Eigen::MatrixXd w = dwt_basis(2, 1, WaveletFamily::haar);
  Eigen::Matrix2d expected;
  expected << 1, 1, 1, -1;
  expected /= std::sqrt(2.0);
  EXPECT_LT((w - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Dwt, Daubechies4Taps) {
  // Published D4 scaling coefficients.
  const double h[4] = {0.48296291314453414, 0.83651630373780794, 0.22414386804201339,
                       -0.12940952255126037};
  const Eigen::MatrixXd w = dwt_basis(16, 1);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(w(k, 0), h[k], 1e-15);
  // First detail atom: g_k = (-1)^k h_{3-k}.
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(w(k, 8), (k % 2 ? -1 : 1) * h[3 - k], 1e-15);
  // Periodic wrap of the last approximation atom.
  EXPECT_NEAR(w(0, 7), h[2], 1e-15);
  EXPECT_NEAR(w(1, 7), h[3], 1e-15);
}

TEST(Dwt, OrthonormalAndPerfectReconstruction) {
  const Eigen::MatrixXd w = dwt_basis(128, 4);
  EXPECT_LT((w.transpose() * w - Eigen::MatrixXd::Identity(128, 128)).cwiseAbs().maxCoeff(), 1e-8);
  std::mt19937_64 gen(1);
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd x = ddcs_test::gaussian_vec(128, gen);
    EXPECT_LT((w * (w.transpose() * x) - x).cwiseAbs().maxCoeff(), 1e-8);
  }
  for (int levels = 1; levels <= 7; ++levels) {
    const Eigen::MatrixXd wl = dwt_basis(128, levels);
    EXPECT_LT((wl.transpose() * wl - Eigen::MatrixXd::Identity(128, 128)).cwiseAbs().maxCoeff(), 1e-8);
  }
  EXPECT_THROW(dwt_basis(100, 2), DimensionError);
  EXPECT_THROW(dwt_basis(128, 8), DimensionError);
}

TEST(DctDwt, ShapeNormsAndRank) {
  const Dictionary psi = dct_dwt_dictionary(128);
  EXPECT_EQ(psi.n(), 128);
  EXPECT_EQ(psi.k(), 256);
  for (Eigen::Index j = 0; j < 256; ++j) EXPECT_NEAR(psi.atoms.col(j).norm(), 1.0, 1e-10);
  // Union of two orthonormal bases: Psi Psi^T = 2 I.
  EXPECT_LT((psi.atoms * psi.atoms.transpose() - 2.0 * Eigen::MatrixXd::Identity(128, 128))
                .cwiseAbs()
                .maxCoeff(),
            1e-8);
}

TEST(DctDwt, CosineAtomCodedInDctHalf) {
  const Dictionary psi = dct_dwt_dictionary(128);
  const SignalWindow x{psi.atoms.col(9), 0};
  const Eigen::VectorXd theta = sparse_code(x, psi, 0.05).coeffs;
  Eigen::Index arg;
  theta.cwiseAbs().maxCoeff(&arg);
  EXPECT_LT(arg, 128);
  EXPECT_EQ(arg, 9);
}
