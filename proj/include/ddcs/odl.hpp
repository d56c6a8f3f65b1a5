#ifndef DDCS_ODL_HPP
#define DDCS_ODL_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ddcs/lasso.hpp"
#include "ddcs/model_store.hpp"

namespace ddcs {

struct OdlConfig {
  int k = 0;             // atoms; 0 means 2n
  double lambda = 0.0;   // l1 weight; 0 means 1.2 / sqrt(n)
  int epochs = 5;
  int batch_size = 1;
  std::uint64_t seed = 42;
  /// Atoms used at most this many times during an epoch are replaced.
  int dead_atom_threshold = 0;
};

int resolved_atom_count(const OdlConfig& cfg, Eigen::Index n);
double resolved_lambda(const OdlConfig& cfg, Eigen::Index n);

/// Running statistics of the surrogate objective
///   (1/t) sum_i 0.5 ||x_i - Psi theta_i||^2 + lambda ||theta_i||_1.
struct OdlState {
  Dictionary psi;
  Eigen::MatrixXd acc_gram;   // k x k, sum theta theta^T
  Eigen::MatrixXd acc_cross;  // n x k, sum x theta^T
  std::int64_t t = 0;
  Eigen::VectorXd power_vec;  // warm start for the step-size estimate
};

OdlState make_odl_state(Dictionary psi);

/// k atoms drawn from distinct nonzero windows (with replacement once the
/// usable windows run out), each scaled to unit norm.
Dictionary init_dictionary(const std::vector<SignalWindow>& windows, int k,
                           std::uint64_t seed);

/// argmin 0.5 ||x - Psi theta||^2 + lambda ||theta||_1.
SparseCode sparse_code(const SignalWindow& x, const Dictionary& psi, double lambda);
LassoResult sparse_code_detailed(const SignalWindow& x, const Dictionary& psi,
                                 double lambda, double lipschitz = 0.0);

/// Codes x against the current dictionary, folds it into the running
/// statistics and runs one block-coordinate sweep over the atoms.
SparseCode odl_step(OdlState& state, const SignalWindow& x, double lambda);

/// Mini-batch form of odl_step: all windows are coded against the same
/// dictionary before the sweep.
std::vector<SparseCode> odl_batch_step(OdlState& state,
                                       const std::vector<const SignalWindow*>& batch,
                                       double lambda);

struct OdlTrainStats {
  std::vector<int> replaced_per_epoch;
  std::vector<double> mean_objective_per_epoch;  // measured while streaming
};

/// Online dictionary learning over shuffled epochs. The returned atoms have
/// exactly unit norm.
Dictionary odl_train(const std::vector<SignalWindow>& windows, const OdlConfig& cfg,
                     OdlTrainStats* stats = nullptr);

std::vector<SparseCode> batch_sparse_code(const std::vector<SignalWindow>& windows,
                                          const Dictionary& psi, double lambda);

}  // namespace ddcs

#endif  // DDCS_ODL_HPP
