#ifndef DDCS_RANDOM_HPP
#define DDCS_RANDOM_HPP

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace ddcs {

/// Portable pseudo-random stream.
///
/// std::mt19937_64 is bit-exact across standard libraries, but the
/// distributions in <random> are not, so uniform and Gaussian variates are
/// derived here from raw engine output. The algorithm name is recorded in
/// reports; bump the version whenever the variate derivation changes.
class RandomStream {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/polar-v1";

  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound) by rejection, no modulo bias.
  std::uint64_t index(std::uint64_t bound);

  /// Standard normal variate (Marsaglia polar method).
  double normal();

  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols,
                                double stddev = 1.0);

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Derives an independent seed for a named sub-stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ddcs

#endif  // DDCS_RANDOM_HPP
