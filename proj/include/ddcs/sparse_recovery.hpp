#ifndef DDCS_SPARSE_RECOVERY_HPP
#define DDCS_SPARSE_RECOVERY_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ddcs/lasso.hpp"
#include "ddcs/model_store.hpp"

namespace ddcs {

struct RecoveryConfig {
  /// Fixed l1 weight; unset means 0.01 * ||(Phi Psi)^T y||_inf per window.
  std::optional<double> lambda_rec;
  int max_iter = 1000;
  double tol = 1e-7;
  /// Noise budget, reporting only.
  std::optional<double> epsilon;
};

inline constexpr double kAutoLambdaScale = 0.01;

/// y = Phi x (noise-free).
MeasurementVector encode(const SensingMatrix& phi, const SignalWindow& x,
                         std::int64_t window_index = 0);

/// Adds white Gaussian noise at `snr_db` relative to the mean power of y.
void add_measurement_noise(MeasurementVector& y, double snr_db, std::uint64_t seed);

struct RecoveryResult {
  SparseCode theta;
  double lambda = 0.0;
  double residual_norm = 0.0;  // achieved ||y - Phi Psi theta||
  LassoResult solver;
};

/// argmin 0.5 ||y - Phi Psi theta||^2 + lambda_rec ||theta||_1.
RecoveryResult recover_detailed(const MeasurementVector& y, const SensingMatrix& phi,
                                const Dictionary& psi, const RecoveryConfig& cfg);
SparseCode recover(const MeasurementVector& y, const SensingMatrix& phi,
                   const Dictionary& psi, const RecoveryConfig& cfg);

/// x = Psi theta.
SignalWindow reconstruct(const Dictionary& psi, const SparseCode& theta,
                         std::int64_t source_offset = 0);

/// DDCM measurement file: "DDCM" | version u32 | m u32 | count u32 |
/// count*m f64, little-endian.
std::string serialize_measurements(const std::vector<MeasurementVector>& ys);
std::vector<MeasurementVector> parse_measurements(std::string_view bytes);
void save_measurements(const std::vector<MeasurementVector>& ys,
                       const std::filesystem::path& path);
std::vector<MeasurementVector> load_measurements(const std::filesystem::path& path);

}  // namespace ddcs

#endif  // DDCS_SPARSE_RECOVERY_HPP
