#ifndef DDCS_SMT_HPP
#define DDCS_SMT_HPP

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ddcs/error.hpp"
#include "ddcs/model_store.hpp"

namespace ddcs {

/// paper: convex program over the elliptope with a nuclear-norm penalty.
/// factored: Y = A^T A with A of fixed row count, so rank is structural.
enum class SmtMode { paper, factored };

SmtMode parse_smt_mode(std::string_view name);
const char* to_string(SmtMode mode);

struct SmtConfig {
  SmtMode mode = SmtMode::factored;
  double beta = 0.0;      // nuclear-norm weight (paper mode)
  int target_m = 0;       // measurement count
  int max_iter = 2000;
  double tol_feas = 1e-6;
  double tol_conv = 1e-7;
  double step_size = 1e-2;  // initial gradient step (factored mode)
  std::uint64_t seed = 42;
  /// Relative singular-value cutoff of Psi^+ when deriving Phi. Lowpassed
  /// signals leave Psi nearly singular off the signal band, and an exact
  /// inverse there turns Phi into a noise amplifier.
  double pinv_cutoff = 0.1;
};

inline constexpr double kExactPinvCutoff = 1e-10;

struct TraceRow {
  int iteration = 0;
  double objective = 0.0;
  double max_violation = 0.0;
  double min_eigenvalue = 0.0;
};

/// Writes iteration,objective,max_violation,min_eigenvalue.
void write_trace_csv(const std::vector<TraceRow>& trace,
                     const std::filesystem::path& path);

struct FeasibilityReport {
  double min_eigenvalue = 0.0;
  double max_diag_error = 0.0;
  double max_asymmetry = 0.0;
  std::vector<double> code_residuals;  // theta_i^T (Y - I) theta_i
};

struct GramSolution {
  Eigen::MatrixXd Y;
  double delta = 0.0;
  int iterations = 0;
  FeasibilityReport feasibility;
  std::vector<TraceRow> history;
};

/// Raised when the paper-mode solver ends infeasible; carries the best
/// iterate seen.
class GramSolveError : public NumericError {
 public:
  GramSolveError(const std::string& what, GramSolution best)
      : NumericError(what), best_(std::move(best)) {}
  const GramSolution& best() const { return best_; }

 private:
  GramSolution best_;
};

struct FactoredSolution {
  Eigen::MatrixXd A;  // target_m x k, unit-norm columns
  double delta_hat = 0.0;
  double initial_delta = 0.0;
  int iterations = 0;
  std::vector<TraceRow> history;
};

struct GramFactor {
  Eigen::MatrixXd A;              // target_m x k
  double truncation_error = 0.0;  // ||Y - A^T A||_F
};

/// Unit-normalizes every nonzero code and drops zero codes.
std::vector<SparseCode> normalize_codes(const std::vector<SparseCode>& codes);

/// Packs codes as columns of a k x L matrix.
Eigen::MatrixXd code_matrix(const std::vector<SparseCode>& codes);

/// max_i |theta_i^T (Y - I) theta_i| for unit-norm codes.
double gram_max_violation(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& codes);

/// min delta + beta ||Y||_* s.t. Y PSD, diag(Y) = 1, |theta_i^T (Y - I) theta_i| <= delta.
///
/// The trace is k on the feasible set and Y = I already has delta = 0, so
/// the solver projects a seeded random full-rank correlation matrix onto
/// {PSD, unit diagonal, theta_i^T (Y - I) theta_i = 0}: ascent on the dual
/// of that projection, one eigenvalue clip per evaluation. Every iterate is
/// certified by rescaling its PSD part to unit diagonal, and the best
/// certified iterate is returned.
GramSolution solve_gram_paper(const std::vector<SparseCode>& codes, const SmtConfig& cfg);

/// Independent re-check of the three constraint families.
FeasibilityReport check_gram(const Eigen::MatrixXd& Y, const std::vector<SparseCode>& codes);

/// min over A (target_m x k, unit columns) of max_i | ||A theta_i||^2 - 1 |
/// through a log-sum-exp surrogate, projected gradient with backtracking.
FactoredSolution solve_gram_factored(const std::vector<SparseCode>& codes,
                                     const SmtConfig& cfg);

/// Y = U S U^T, A = (U_m sqrt(S_m))^T from the top target_m eigenpairs.
GramFactor factor_gram(const Eigen::MatrixXd& Y, int target_m);

/// Phi = A Psi^+ with the pseudoinverse from a thin SVD. At the exact
/// cutoff Psi Psi^+ = I is verified; larger cutoffs give a truncated inverse.
SensingMatrix derive_phi(const Eigen::MatrixXd& A, const Dictionary& psi,
                         double cutoff = kExactPinvCutoff);

/// Pseudoinverse of a dictionary with singular values <= cutoff * sigma_max
/// dropped. At the exact cutoff a rank-deficient dictionary throws.
Eigen::MatrixXd dictionary_pinv(const Dictionary& psi, double cutoff = kExactPinvCutoff);

/// max_i | ||Phi Psi theta_i||^2 / ||theta_i||^2 - 1 |.
double empirical_delta(const SensingMatrix& phi, const Dictionary& psi,
                       const std::vector<SparseCode>& codes);

/// Refines Phi directly against the training codes: minimizes
/// max_i | ||Phi Psi theta_i||^2 - 1 | over Phi starting from `initial`,
/// using the same smoothed objective as solve_gram_factored. Returns the
/// best iterate, never worse than `initial` on the codes.
struct PhiRefinement {
  SensingMatrix phi;
  double delta = 0.0;
  double initial_delta = 0.0;
  int iterations = 0;
  std::vector<TraceRow> history;
};
PhiRefinement refine_phi(const SensingMatrix& initial, const Dictionary& psi,
                         const std::vector<SparseCode>& codes, const SmtConfig& cfg);

}  // namespace ddcs

#endif  // DDCS_SMT_HPP
