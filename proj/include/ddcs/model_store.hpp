#ifndef DDCS_MODEL_STORE_HPP
#define DDCS_MODEL_STORE_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace ddcs {

/// One n-sample segment of a preprocessed recording.
struct SignalWindow {
  Eigen::VectorXd samples;
  std::int64_t source_offset = 0;
};

/// n x k matrix whose columns are the atoms.
struct Dictionary {
  Eigen::MatrixXd atoms;

  Eigen::Index n() const { return atoms.rows(); }
  Eigen::Index k() const { return atoms.cols(); }
};

/// m x n measurement operator.
struct SensingMatrix {
  Eigen::MatrixXd matrix;

  Eigen::Index m() const { return matrix.rows(); }
  Eigen::Index n() const { return matrix.cols(); }
};

struct SparseCode {
  Eigen::VectorXd coeffs;
};

struct MeasurementVector {
  Eigen::VectorXd values;
  std::int64_t window_index = 0;
};

inline constexpr std::uint32_t kBundleFormatVersion = 1;

/// Phi and Psi trained together, plus what is needed to reproduce reports.
struct TrainedBundle {
  SensingMatrix phi;
  Dictionary psi;
  std::uint32_t n = 0;
  std::uint32_t m = 0;
  std::uint32_t k = 0;
  /// Empirical isometry constant on the training codes.
  double achieved_delta = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t format_version = kBundleFormatVersion;
};

/// Every violated invariant, in a stable order. Empty means valid.
std::vector<std::string> validate_bundle(const TrainedBundle& bundle);

/// DDCS wire format:
///   "DDCS" | version u32 | seed u64 | n,m,k u32 | achieved_delta f64 |
///   phi block | psi block
/// where a block is rows u32 | cols u32 | rows*cols f64 row-major, all
/// little-endian.
std::string serialize_bundle(const TrainedBundle& bundle);
TrainedBundle parse_bundle(std::string_view bytes);

void save_bundle(const TrainedBundle& bundle, const std::filesystem::path& path);
TrainedBundle load_bundle(const std::filesystem::path& path);

}  // namespace ddcs

#endif  // DDCS_MODEL_STORE_HPP
