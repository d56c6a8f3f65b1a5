#include "ddcs/baselines.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "ddcs/error.hpp"
#include "ddcs/random.hpp"

namespace ddcs {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<double> lowpass_taps(WaveletFamily family) {
  if (family == WaveletFamily::haar) return {1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2};
  const double s3 = std::sqrt(3.0);
  const double norm = 4.0 * std::numbers::sqrt2;
  return {(1 + s3) / norm, (3 + s3) / norm, (3 - s3) / norm, (1 - s3) / norm};
}

// Single-level periodic analysis operator on `len` samples: approximation
// rows first, then detail rows.
Eigen::MatrixXd analysis_level(int len, const std::vector<double>& h) {
  const int taps = static_cast<int>(h.size());
  std::vector<double> g(taps);
  for (int k = 0; k < taps; ++k) g[k] = ((k % 2) ? -1.0 : 1.0) * h[taps - 1 - k];
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(len, len);
  const int half = len / 2;
  for (int i = 0; i < half; ++i) {
    for (int k = 0; k < taps; ++k) {
      const int col = (2 * i + k) % len;
      op(i, col) += h[k];
      op(half + i, col) += g[k];
    }
  }
  return op;
}

}  // namespace

SensingMatrix gaussian_phi(int m, int n, std::uint64_t seed) {
  if (m < 1 || m >= n) throw DimensionError("gaussian phi needs 1 <= m < n");
  RandomStream rng(seed);
  return {rng.normal_matrix(m, n, 1.0 / std::sqrt(static_cast<double>(m)))};
}

Eigen::MatrixXd dct_basis(int n) {
  if (n < 1) throw DimensionError("dct size must be >= 1");
  Eigen::MatrixXd d(n, n);
  for (int j = 0; j < n; ++j) {
    const double c = std::sqrt((j == 0 ? 1.0 : 2.0) / n);
    for (int i = 0; i < n; ++i) d(i, j) = c * std::cos(std::numbers::pi * (2 * i + 1) * j / (2.0 * n));
  }
  return d;
}

Eigen::MatrixXd dwt_basis(int n, int levels, WaveletFamily family) {
  if (!is_power_of_two(n)) throw DimensionError("wavelet size must be a power of two");
  const int max_levels = static_cast<int>(std::log2(n));
  if (levels < 1 || levels > max_levels)
    throw DimensionError("wavelet levels must lie in [1, log2(n)]");
  const auto h = lowpass_taps(family);
  // Full analysis T = T_L ... T_1, each acting on the leading approximation
  // block; the synthesis matrix is T^T.
  Eigen::MatrixXd analysis = Eigen::MatrixXd::Identity(n, n);
  int len = n;
  for (int level = 0; level < levels; ++level) {
    Eigen::MatrixXd stage = Eigen::MatrixXd::Identity(n, n);
    stage.topLeftCorner(len, len) = analysis_level(len, h);
    analysis = stage * analysis;
    len /= 2;
  }
  return analysis.transpose();
}

Dictionary dct_dwt_dictionary(int n, int levels) {
  Dictionary psi;
  psi.atoms.resize(n, 2 * n);
  psi.atoms.leftCols(n) = dct_basis(n);
  psi.atoms.rightCols(n) = dwt_basis(n, levels);
  return psi;
}

}  // namespace ddcs
