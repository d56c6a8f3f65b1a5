#ifndef DDCS_LASSO_HPP
#define DDCS_LASSO_HPP

#include <vector>

#include <Eigen/Core>

namespace ddcs {

struct LassoOptions {
  int max_iter = 5000;
  /// Stop once the subgradient residual is <= tol * max(1, objective).
  double tol = 1e-7;
  /// Keep the objective of every accepted iterate.
  bool record_history = false;
};

struct LassoResult {
  Eigen::VectorXd theta;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

/// 0.5 * ||y - M theta||^2 + lambda * ||theta||_1
double lasso_objective(const Eigen::Ref<const Eigen::MatrixXd>& op,
                       const Eigen::Ref<const Eigen::VectorXd>& y, double lambda,
                       const Eigen::Ref<const Eigen::VectorXd>& theta);

/// Largest violation of the lasso optimality conditions with g = M^T(M theta - y):
/// |g_j + lambda sign(theta_j)| on the support, max(|g_j| - lambda, 0) off it.
double lasso_kkt_residual(const Eigen::Ref<const Eigen::MatrixXd>& op,
                          const Eigen::Ref<const Eigen::VectorXd>& y, double lambda,
                          const Eigen::Ref<const Eigen::VectorXd>& theta);

/// Largest squared singular value of `op` by power iteration, stopping at the
/// given relative change. `warm` (optional) seeds and receives the iterate.
/// Throws NumericError for an all-zero operator.
double spectral_norm_sq(const Eigen::Ref<const Eigen::MatrixXd>& op,
                        double rel_tol = 1e-4, Eigen::VectorXd* warm = nullptr);

/// Monotone FISTA with adaptive restart and soft-thresholding.
///
/// Accepted iterates never increase the objective. Whenever the support looks
/// settled the solver tries the closed-form solution on that sign pattern and
/// keeps it if it passes the optimality certificate. `lipschitz` <= 0 means
/// estimate ||M||^2 here.
LassoResult solve_lasso(const Eigen::Ref<const Eigen::MatrixXd>& op,
                        const Eigen::Ref<const Eigen::VectorXd>& y, double lambda,
                        const LassoOptions& options = {}, double lipschitz = 0.0);

}  // namespace ddcs

#endif  // DDCS_LASSO_HPP
