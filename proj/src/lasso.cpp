#include "ddcs/lasso.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "ddcs/error.hpp"

namespace ddcs {

namespace {

constexpr int kCheckEvery = 10;

double soft(double v, double thresh) {
  if (v > thresh) return v - thresh;
  if (v < -thresh) return v + thresh;
  return 0.0;
}

// M v, skipping zero coefficients when v is sparse.
Eigen::VectorXd apply(const Eigen::Ref<const Eigen::MatrixXd>& op,
                      const Eigen::VectorXd& v) {
  const Eigen::Index nnz = (v.array() != 0.0).count();
  if (4 * nnz >= v.size()) return op * v;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(op.rows());
  for (Eigen::Index j = 0; j < v.size(); ++j)
    if (v[j] != 0.0) out.noalias() += v[j] * op.col(j);
  return out;
}

double objective_from_residual(const Eigen::VectorXd& residual, double lambda,
                               const Eigen::VectorXd& theta) {
  return 0.5 * residual.squaredNorm() + lambda * theta.lpNorm<1>();
}

double kkt_from_gradient(const Eigen::VectorXd& grad, double lambda,
                         const Eigen::VectorXd& theta) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double v = theta[j] > 0.0   ? std::abs(grad[j] + lambda)
                     : theta[j] < 0.0 ? std::abs(grad[j] - lambda)
                                      : std::max(std::abs(grad[j]) - lambda, 0.0);
    worst = std::max(worst, v);
  }
  return worst;
}

// Closed-form minimizer on a fixed support and sign pattern. Returns false
// when the reduced system is singular or the signs do not survive.
bool solve_on_support(const Eigen::Ref<const Eigen::MatrixXd>& op,
                      const Eigen::VectorXd& mty, double lambda,
                      const std::vector<Eigen::Index>& support,
                      const Eigen::VectorXd& reference, Eigen::VectorXd& out) {
  const auto s = static_cast<Eigen::Index>(support.size());
  if (s == 0 || s > op.rows()) return false;
  Eigen::MatrixXd cols(op.rows(), s);
  Eigen::VectorXd rhs(s);
  for (Eigen::Index i = 0; i < s; ++i) {
    cols.col(i) = op.col(support[i]);
    rhs[i] = mty[support[i]] - lambda * (reference[support[i]] > 0.0 ? 1.0 : -1.0);
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cols.transpose() * cols);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
  const Eigen::VectorXd vals = ldlt.solve(rhs);
  if (!vals.allFinite()) return false;
  out = Eigen::VectorXd::Zero(op.cols());
  for (Eigen::Index i = 0; i < s; ++i) {
    if ((vals[i] > 0.0) != (reference[support[i]] > 0.0) || vals[i] == 0.0) return false;
    out[support[i]] = vals[i];
  }
  return true;
}

}  // namespace

double lasso_objective(const Eigen::Ref<const Eigen::MatrixXd>& op,
                       const Eigen::Ref<const Eigen::VectorXd>& y, double lambda,
                       const Eigen::Ref<const Eigen::VectorXd>& theta) {
  return 0.5 * (op * theta - y).squaredNorm() + lambda * theta.lpNorm<1>();
}

double lasso_kkt_residual(const Eigen::Ref<const Eigen::MatrixXd>& op,
                          const Eigen::Ref<const Eigen::VectorXd>& y, double lambda,
                          const Eigen::Ref<const Eigen::VectorXd>& theta) {
  const Eigen::VectorXd grad = op.transpose() * (op * theta - y);
  return kkt_from_gradient(grad, lambda, theta);
}

double spectral_norm_sq(const Eigen::Ref<const Eigen::MatrixXd>& op, double rel_tol,
                        Eigen::VectorXd* warm) {
  const Eigen::Index k = op.cols();
  if (k == 0 || op.rows() == 0) throw NumericError("power iteration on empty operator");
  Eigen::VectorXd v;
  if (warm != nullptr && warm->size() == k && warm->norm() > 0.0) {
    v = *warm;
  } else {
    v.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) v[j] = 1.0 + 0.37 * std::sin(1.0 + j);
  }
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXd w = op.transpose() * (op * v);
    const double norm = w.norm();
    if (!std::isfinite(norm)) throw NumericError("power iteration diverged");
    if (norm == 0.0) {
      if (op.cwiseAbs().maxCoeff() == 0.0) throw NumericError("operator is all-zero");
      // Start vector orthogonal to the row space: restart from a column.
      Eigen::Index col = 0;
      op.colwise().norm().maxCoeff(&col);
      v = Eigen::VectorXd::Unit(k, col);
      continue;
    }
    v = w / norm;
    const bool done = std::abs(norm - estimate) <= rel_tol * norm;
    estimate = norm;
    if (done) break;
  }
  if (warm != nullptr) *warm = v;
  return estimate;
}

LassoResult solve_lasso(const Eigen::Ref<const Eigen::MatrixXd>& op,
                        const Eigen::Ref<const Eigen::VectorXd>& y, double lambda,
                        const LassoOptions& options, double lipschitz) {
  if (y.size() != op.rows()) throw DimensionError("lasso: operator and signal disagree");
  if (!op.allFinite() || !y.allFinite() || !std::isfinite(lambda))
    throw NumericError("non-finite input");
  if (lambda < 0.0) throw Error("lambda must be >= 0");

  const Eigen::Index k = op.cols();
  const Eigen::VectorXd mty = op.transpose() * y;
  LassoResult result;
  result.theta = Eigen::VectorXd::Zero(k);
  result.objective = 0.5 * y.squaredNorm();
  if (options.record_history) result.history.push_back(result.objective);
  if (k == 0 || mty.lpNorm<Eigen::Infinity>() <= lambda) {
    result.kkt_residual = k == 0 ? 0.0 : kkt_from_gradient(-mty, lambda, result.theta);
    result.converged = true;
    return result;
  }

  double step_l = lipschitz > 0.0 ? lipschitz : spectral_norm_sq(op) * (1.0 + 1e-3);

  Eigen::VectorXd x = result.theta;
  Eigen::VectorXd z = x;
  double fx = result.objective;
  double t = 1.0;
  bool at_restart = true;
  Eigen::VectorXd cand(k), polished;
  std::vector<Eigen::Index> support;

  auto certify = [&](const Eigen::VectorXd& theta, double obj) {
    const double res = lasso_kkt_residual(op, y, lambda, theta);
    return std::pair{res, res <= options.tol * std::max(1.0, obj)};
  };

  for (int it = 1; it <= options.max_iter; ++it) {
    result.iterations = it;
    const Eigen::VectorXd grad = op.transpose() * (apply(op, z) - y);
    for (Eigen::Index j = 0; j < k; ++j) cand[j] = soft(z[j] - grad[j] / step_l, lambda / step_l);
    const double fc = objective_from_residual(apply(op, cand) - y, lambda, cand);

    if (fc <= fx) {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const Eigen::VectorXd diff = cand - x;
      // Gradient-based adaptive restart.
      const bool restart = (z - cand).dot(diff) > 0.0;
      x = cand;
      fx = fc;
      if (options.record_history) result.history.push_back(fx);
      if (restart) {
        t = 1.0;
        z = x;
        at_restart = true;
      } else {
        z = x + ((t - 1.0) / t_next) * diff;
        t = t_next;
        at_restart = false;
      }
    } else if (at_restart) {
      // A plain proximal step from x failed to descend: the curvature
      // estimate is too small (ties at rounding level are left alone).
      if (fc - fx > 1e-13 * std::max(1.0, std::abs(fx))) step_l *= 2.0;
    } else {
      t = 1.0;
      z = x;
      at_restart = true;
    }

    if (it % kCheckEvery != 0) continue;
    auto [res, ok] = certify(x, fx);
    result.kkt_residual = res;
    if (ok) {
      result.converged = true;
      break;
    }
    // Try the closed form on the current support, then on its dominant part.
    support.clear();
    const double big = x.cwiseAbs().maxCoeff();
    for (int pass = 0; pass < 2 && !result.converged; ++pass) {
      std::vector<Eigen::Index> trial;
      for (Eigen::Index j = 0; j < k; ++j)
        if (pass == 0 ? x[j] != 0.0 : std::abs(x[j]) > 1e-3 * big) trial.push_back(j);
      if (trial.empty() || (pass == 1 && trial == support)) continue;
      support = trial;
      if (!solve_on_support(op, mty, lambda, trial, x, polished)) continue;
      const double fp = lasso_objective(op, y, lambda, polished);
      auto [pres, pok] = certify(polished, fp);
      if (pok && fp <= fx + 1e-12 * std::max(1.0, std::abs(fx))) {
        x = polished;
        fx = fp;
        result.kkt_residual = pres;
        result.converged = true;
        if (options.record_history) result.history.push_back(fx);
      }
    }
    if (result.converged) break;
  }

  if (!result.converged) {
    auto [res, ok] = certify(x, fx);
    result.kkt_residual = res;
    result.converged = ok;
  }
  result.theta = x;
  result.objective = fx;
  return result;
}

}  // namespace ddcs
