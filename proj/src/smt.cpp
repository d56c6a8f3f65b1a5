#include "ddcs/smt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/SparseCore>

#include "ddcs/binary_io.hpp"
#include "ddcs/random.hpp"

namespace ddcs {

namespace {

constexpr double kTemperature = 100.0;
constexpr int kStallLimit = 50;

Eigen::SparseMatrix<double> sparse_codes(const std::vector<SparseCode>& codes) {
  const Eigen::Index k = codes.front().coeffs.size();
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i].coeffs.size() != k) throw DimensionError("codes differ in length");
    for (Eigen::Index j = 0; j < k; ++j)
      if (codes[i].coeffs[j] != 0.0)
        entries.emplace_back(j, static_cast<Eigen::Index>(i), codes[i].coeffs[j]);
  }
  Eigen::SparseMatrix<double> out(k, static_cast<Eigen::Index>(codes.size()));
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

void normalize_columns(Eigen::MatrixXd& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const double norm = a.col(j).norm();
    if (norm > 0.0) a.col(j) /= norm;
  }
}

// Smoothed max-violation over the columns v_i of V:
//   g(X) = (1/tau) log sum_i exp(tau r_i) + exp(-tau r_i),  r_i = ||X v_i||^2 - 1
struct SmoothedViolation {
  double smooth = 0.0;
  double max_violation = 0.0;
  Eigen::MatrixXd grad;
};

template <typename VMat>
SmoothedViolation evaluate_violation(const Eigen::MatrixXd& x, const VMat& v, double tau,
                                     bool with_grad) {
  const Eigen::MatrixXd proj = x * v;
  const Eigen::ArrayXd r = proj.colwise().squaredNorm().transpose().array() - 1.0;
  SmoothedViolation out;
  out.max_violation = r.abs().maxCoeff();
  const double top = out.max_violation;
  const Eigen::ArrayXd up = (tau * (r - top)).exp();
  const Eigen::ArrayXd down = (tau * (-r - top)).exp();
  const double total = up.sum() + down.sum();
  out.smooth = top + std::log(total) / tau;
  if (with_grad) {
    const Eigen::VectorXd w = ((up - down) / total).matrix();
    out.grad = 2.0 * (proj * w.asDiagonal()) * v.transpose();
  }
  return out;
}

struct DescentResult {
  Eigen::MatrixXd best;
  double best_violation = 0.0;
  double initial_violation = 0.0;
  int iterations = 0;
  std::vector<TraceRow> history;
};

// Projected gradient with backtracking on the smoothed max-violation. The
// temperature is doubled once when the true max-violation stops improving
// for kStallLimit accepted steps; a second stall ends the run.
template <typename VMat>
DescentResult minimize_max_violation(Eigen::MatrixXd x, const VMat& v, bool unit_columns,
                                     const SmtConfig& cfg) {
  double tau = kTemperature;
  bool continued = false;
  double step = cfg.step_size;
  SmoothedViolation cur = evaluate_violation(x, v, tau, true);

  DescentResult out;
  out.best = x;
  out.best_violation = out.initial_violation = cur.max_violation;
  out.history.push_back({0, cur.smooth, cur.max_violation, 0.0});
  int stall = 0;

  for (int it = 1; it <= cfg.max_iter; ++it) {
    out.iterations = it;
    bool accepted = false;
    Eigen::MatrixXd trial;
    SmoothedViolation next;
    while (step > 1e-16) {
      trial = x - step * cur.grad;
      if (unit_columns) normalize_columns(trial);
      next = evaluate_violation(trial, v, tau, false);
      const Eigen::MatrixXd diff = trial - x;
      const double model =
          cur.smooth + (cur.grad.array() * diff.array()).sum() + diff.squaredNorm() / (2.0 * step);
      if (next.smooth <= model) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    x = std::move(trial);
    step *= 1.25;
    cur = evaluate_violation(x, v, tau, true);
    out.history.push_back({it, cur.smooth, cur.max_violation, 0.0});

    if (cur.max_violation < out.best_violation - cfg.tol_conv) {
      out.best = x;
      out.best_violation = cur.max_violation;
      stall = 0;
    } else if (++stall >= kStallLimit) {
      if (continued) break;
      continued = true;
      stall = 0;
      tau *= 2.0;
      cur = evaluate_violation(x, v, tau, true);
    }
    if (cur.max_violation < out.best_violation) {
      out.best = x;
      out.best_violation = cur.max_violation;
    }
  }
  return out;
}

Eigen::MatrixXd scale_to_unit_diagonal(const Eigen::MatrixXd& x) {
  const Eigen::VectorXd d = x.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd y = d.asDiagonal() * x * d.asDiagonal();
  y = 0.5 * (y + y.transpose());
  y.diagonal().setOnes();
  return y;
}

}  // namespace

SmtMode parse_smt_mode(std::string_view name) {
  if (name == "paper") return SmtMode::paper;
  if (name == "factored") return SmtMode::factored;
  throw Error("unknown smt mode '" + std::string(name) + "'");
}

const char* to_string(SmtMode mode) { return mode == SmtMode::paper ? "paper" : "factored"; }

void write_trace_csv(const std::vector<TraceRow>& trace, const std::filesystem::path& path) {
  std::string out = "iteration,objective,max_violation,min_eigenvalue\n";
  char line[160];
  for (const auto& row : trace) {
    std::snprintf(line, sizeof line, "%d,%.12g,%.12g,%.12g\n", row.iteration, row.objective,
                  row.max_violation, row.min_eigenvalue);
    out += line;
  }
  write_file_atomic(path, out);
}

std::vector<SparseCode> normalize_codes(const std::vector<SparseCode>& codes) {
  std::vector<SparseCode> out;
  out.reserve(codes.size());
  for (const auto& c : codes) {
    const double norm = c.coeffs.norm();
    if (norm > 0.0 && std::isfinite(norm)) out.push_back({c.coeffs / norm});
  }
  if (out.empty()) throw Error("no usable codes");
  return out;
}

Eigen::MatrixXd code_matrix(const std::vector<SparseCode>& codes) {
  if (codes.empty()) return {};
  Eigen::MatrixXd out(codes.front().coeffs.size(), static_cast<Eigen::Index>(codes.size()));
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i].coeffs.size() != out.rows()) throw DimensionError("codes differ in length");
    out.col(static_cast<Eigen::Index>(i)) = codes[i].coeffs;
  }
  return out;
}

double gram_max_violation(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& codes) {
  const Eigen::MatrixXd yc = Y * codes;
  return ((codes.array() * yc.array()).colwise().sum() - 1.0).abs().maxCoeff();
}

FeasibilityReport check_gram(const Eigen::MatrixXd& Y, const std::vector<SparseCode>& codes) {
  FeasibilityReport rep;
  rep.max_asymmetry = (Y - Y.transpose()).cwiseAbs().maxCoeff();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (Y + Y.transpose()),
                                                           Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = eig.eigenvalues().minCoeff();
  rep.max_diag_error = (Y.diagonal().array() - 1.0).abs().maxCoeff();
  for (const auto& c : codes)
    rep.code_residuals.push_back(c.coeffs.dot(Y * c.coeffs) - c.coeffs.squaredNorm());
  return rep;
}

GramSolution solve_gram_paper(const std::vector<SparseCode>& codes, const SmtConfig& cfg) {
  if (codes.empty()) throw Error("no usable codes");
  const Eigen::MatrixXd theta = code_matrix(codes);
  const Eigen::Index k = theta.rows();
  const Eigen::Index rows = k + theta.cols();

  // Full-rank start keeps the projection away from the cone boundary.
  RandomStream rng(cfg.seed);
  Eigen::MatrixXd b = rng.normal_matrix(k, k);
  normalize_columns(b);
  const Eigen::MatrixXd y0 = b.transpose() * b;

  // Affine part: <t t^T, Y> = ||t||^2 for every column t of [I | theta]. On the elliptope ||Y||_* = trace(Y) = k,
  // so beta only shifts the objective and the slabs close to delta = 0.
  Eigen::MatrixXd t(k, rows);
  t << Eigen::MatrixXd::Identity(k, k), theta;
  const Eigen::MatrixXd gram = (t.transpose() * t).array().square().matrix();
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> gram_inv(gram);
  const Eigen::VectorXd rhs = t.colwise().squaredNorm().transpose();

  struct Point {
    Eigen::VectorXd mult;
    Eigen::MatrixXd psd;
    double dual = 0.0;
    double min_eig = 0.0;
  };
  // Dual of min 0.5 ||Y - Y0||^2 over {Y PSD} with the affine constraints;
  // each evaluation is one eigenvalue clip.
  auto evaluate = [&](Eigen::VectorXd mult) {
    Point p;
    const Eigen::MatrixXd r = y0 + t * mult.asDiagonal() * t.transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (r + r.transpose()));
    p.psd = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
            eig.eigenvectors().transpose();
    p.min_eig = eig.eigenvalues().minCoeff();
    p.dual = mult.dot(rhs) - 0.5 * p.psd.squaredNorm();
    p.mult = std::move(mult);
    return p;
  };

  GramSolution best;
  best.delta = std::numeric_limits<double>::infinity();
  std::vector<TraceRow> history;
  Point cur = evaluate(Eigen::VectorXd::Zero(rows));
  int stall = 0;
  int it = 0;
  for (it = 1; it <= cfg.max_iter; ++it) {
    // Certified iterate: PSD part rescaled onto the elliptope.
    const Eigen::MatrixXd certified = scale_to_unit_diagonal(cur.psd);
    const double delta = gram_max_violation(certified, theta);
    history.push_back({it, delta + cfg.beta * certified.trace(), delta, cur.min_eig});
    if (delta < best.delta) {
      best.Y = certified;
      best.delta = delta;
    }
    if (best.delta <= 1e-2 * cfg.tol_feas) break;

    // Ascent on the dual, preconditioned by (A A^*)^+ and backtracked.
    const Eigen::MatrixXd pt = cur.psd * t;
    const Eigen::VectorXd grad =
        rhs - (t.array() * pt.array()).colwise().sum().transpose().matrix();
    const Eigen::VectorXd dir = gram_inv.solve(grad);
    const double slope = grad.dot(dir);
    if (!(slope > 0.0)) break;
    double step = 1.0;
    Point next = evaluate(cur.mult + dir);
    while (next.dual < cur.dual + 1e-4 * step * slope && step > 1e-12) {
      step *= 0.5;
      next = evaluate(cur.mult + step * dir);
    }
    if (step <= 1e-12) break;
    if (next.dual - cur.dual <= cfg.tol_conv * std::max(1.0, std::abs(cur.dual))) {
      if (++stall >= kStallLimit) {
        cur = std::move(next);
        break;
      }
    } else {
      stall = 0;
    }
    cur = std::move(next);
  }

  best.iterations = std::min(it, cfg.max_iter);
  best.history = std::move(history);
  if (!std::isfinite(best.delta))
    throw GramSolveError("gram solver produced no finite iterate", std::move(best));
  best.feasibility = check_gram(best.Y, codes);
  return best;
}

FactoredSolution solve_gram_factored(const std::vector<SparseCode>& codes, const SmtConfig& cfg) {
  if (codes.empty()) throw Error("no usable codes");
  const Eigen::Index k = codes.front().coeffs.size();
  if (cfg.target_m < 1 || cfg.target_m > k)
    throw DimensionError("target_m must lie in [1, k]");
  const Eigen::SparseMatrix<double> v = sparse_codes(codes);

  RandomStream rng(cfg.seed);
  Eigen::MatrixXd a = rng.normal_matrix(cfg.target_m, k, 1.0 / std::sqrt(cfg.target_m));
  normalize_columns(a);

  DescentResult run = minimize_max_violation(std::move(a), v, true, cfg);
  FactoredSolution out;
  out.A = std::move(run.best);
  out.delta_hat = run.best_violation;
  out.initial_delta = run.initial_violation;
  out.iterations = run.iterations;
  out.history = std::move(run.history);
  return out;
}

GramFactor factor_gram(const Eigen::MatrixXd& Y, int target_m) {
  const Eigen::Index k = Y.rows();
  if (Y.cols() != k) throw DimensionError("gram matrix must be square");
  if (target_m < 1 || target_m > k) throw DimensionError("target_m must lie in [1, k]");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (Y + Y.transpose()));
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  const Eigen::VectorXd vals = eig.eigenvalues().reverse();
  const Eigen::MatrixXd vecs = eig.eigenvectors().rowwise().reverse();
  if (vals.minCoeff() < -1e-6 * std::max(1.0, std::abs(vals.maxCoeff())))
    throw NumericError("gram matrix is not positive semidefinite");

  GramFactor out;
  out.A.resize(target_m, k);
  for (int i = 0; i < target_m; ++i)
    out.A.row(i) = std::sqrt(std::max(vals[i], 0.0)) * vecs.col(i).transpose();
  out.truncation_error = (Y - out.A.transpose() * out.A).norm();
  return out;
}

Eigen::MatrixXd dictionary_pinv(const Dictionary& psi, double cutoff) {
  if (!(cutoff >= kExactPinvCutoff) || !(cutoff < 1.0))
    throw Error("pseudoinverse cutoff must lie in [1e-10, 1)");
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(psi.atoms, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) throw NumericError("rank-deficient dictionary");
  if (cutoff == kExactPinvCutoff &&
      (s.size() < psi.n() || s[s.size() - 1] <= kExactPinvCutoff * s[0]))
    throw NumericError("rank-deficient dictionary");
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > cutoff * s[0]) inv[i] = 1.0 / s[i];
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

SensingMatrix derive_phi(const Eigen::MatrixXd& A, const Dictionary& psi, double cutoff) {
  if (A.cols() != psi.k())
    throw DimensionError("A has " + std::to_string(A.cols()) + " columns, dictionary has " +
                         std::to_string(psi.k()) + " atoms");
  const Eigen::MatrixXd pinv = dictionary_pinv(psi, cutoff);
  if (cutoff != kExactPinvCutoff) return {A * pinv};
  const Eigen::MatrixXd check = psi.atoms * pinv - Eigen::MatrixXd::Identity(psi.n(), psi.n());
  if (check.cwiseAbs().maxCoeff() > 1e-8)
    throw NumericError("pseudoinverse check failed: ||Psi Psi^+ - I||_max = " +
                       std::to_string(check.cwiseAbs().maxCoeff()));
  return {A * pinv};
}

double empirical_delta(const SensingMatrix& phi, const Dictionary& psi,
                       const std::vector<SparseCode>& codes) {
  if (codes.empty()) throw Error("empty code list");
  if (phi.n() != psi.n()) throw DimensionError("phi and psi disagree on n");
  const Eigen::MatrixXd product = phi.matrix * psi.atoms;
  double worst = 0.0;
  for (const auto& c : codes) {
    if (c.coeffs.size() != psi.k()) throw DimensionError("code length does not match dictionary");
    const double norm_sq = c.coeffs.squaredNorm();
    if (norm_sq == 0.0) throw Error("zero code in isometry measurement");
    worst = std::max(worst, std::abs((product * c.coeffs).squaredNorm() / norm_sq - 1.0));
  }
  return worst;
}

PhiRefinement refine_phi(const SensingMatrix& initial, const Dictionary& psi,
                         const std::vector<SparseCode>& codes, const SmtConfig& cfg) {
  if (codes.empty()) throw Error("no usable codes");
  if (initial.n() != psi.n()) throw DimensionError("phi and psi disagree on n");
  const Eigen::MatrixXd signals = psi.atoms * code_matrix(normalize_codes(codes));
  DescentResult run = minimize_max_violation(initial.matrix, signals, false, cfg);
  PhiRefinement out;
  out.phi.matrix = std::move(run.best);
  out.delta = run.best_violation;
  out.initial_delta = run.initial_violation;
  out.iterations = run.iterations;
  out.history = std::move(run.history);
  return out;
}

}  // namespace ddcs
