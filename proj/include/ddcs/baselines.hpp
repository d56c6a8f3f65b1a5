#ifndef DDCS_BASELINES_HPP
#define DDCS_BASELINES_HPP

#include <cstdint>

#include <Eigen/Core>

#include "ddcs/model_store.hpp"

namespace ddcs {

enum class BaselineKind { gaussian_phi, dct_dwt_psi };

enum class WaveletFamily { haar, daubechies4 };

/// Entries i.i.d. N(0, 1/m) from RandomStream(seed), filled row by row.
SensingMatrix gaussian_phi(int m, int n, std::uint64_t seed);

/// Orthonormal DCT-II synthesis matrix; column j is the j-th cosine.
Eigen::MatrixXd dct_basis(int n);

/// Orthonormal periodic wavelet synthesis matrix (x = W c) with the given
/// number of decomposition levels. n must be a power of two.
Eigen::MatrixXd dwt_basis(int n, int levels = 4,
                          WaveletFamily family = WaveletFamily::daubechies4);

/// [DCT | DWT], n x 2n.
Dictionary dct_dwt_dictionary(int n, int levels = 4);

}  // namespace ddcs

#endif  // DDCS_BASELINES_HPP
