#include "ddcs/odl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ddcs/error.hpp"
#include "ddcs/parallel.hpp"
#include "ddcs/random.hpp"

namespace ddcs {

namespace {

constexpr double kMinAtomWeight = 1e-12;

void check_window(const SignalWindow& x, const Dictionary& psi) {
  if (x.samples.size() != psi.n())
    throw DimensionError("window length " + std::to_string(x.samples.size()) +
                         " does not match dictionary rows " + std::to_string(psi.n()));
  if (!x.samples.allFinite()) throw NumericError("non-finite input");
}

Eigen::Index window_length(const std::vector<SignalWindow>& windows) {
  if (windows.empty()) throw Error("no training windows");
  const Eigen::Index n = windows.front().samples.size();
  for (const auto& w : windows)
    if (w.samples.size() != n) throw DimensionError("windows differ in length");
  return n;
}

// One pass of block coordinate descent on the surrogate, columns projected
// onto the unit ball.
void update_atoms(OdlState& s) {
  auto& psi = s.psi.atoms;
  for (Eigen::Index j = 0; j < psi.cols(); ++j) {
    const double weight = s.acc_gram(j, j);
    if (weight < kMinAtomWeight) continue;
    Eigen::VectorXd u =
        psi.col(j) + (s.acc_cross.col(j) - psi * s.acc_gram.col(j)) / weight;
    const double norm = u.norm();
    psi.col(j) = u / std::max(norm, 1.0);
  }
}

}  // namespace

int resolved_atom_count(const OdlConfig& cfg, Eigen::Index n) {
  return cfg.k > 0 ? cfg.k : static_cast<int>(2 * n);
}

double resolved_lambda(const OdlConfig& cfg, Eigen::Index n) {
  return cfg.lambda > 0.0 ? cfg.lambda : 1.2 / std::sqrt(static_cast<double>(n));
}

OdlState make_odl_state(Dictionary psi) {
  OdlState s;
  const Eigen::Index n = psi.n(), k = psi.k();
  s.psi = std::move(psi);
  s.acc_gram = Eigen::MatrixXd::Zero(k, k);
  s.acc_cross = Eigen::MatrixXd::Zero(n, k);
  return s;
}

Dictionary init_dictionary(const std::vector<SignalWindow>& windows, int k,
                           std::uint64_t seed) {
  if (k < 1) throw Error("atom count must be >= 1");
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < windows.size(); ++i)
    if (windows[i].samples.allFinite() && windows[i].samples.norm() > 0.0) usable.push_back(i);
  if (usable.empty()) throw Error("no usable initialization data");
  const Eigen::Index n = windows[usable.front()].samples.size();

  RandomStream rng(seed);
  std::vector<std::size_t> picks;
  picks.reserve(k);
  // Partial Fisher-Yates over the usable windows, then draws with
  // replacement once they are exhausted.
  std::vector<std::size_t> pool = usable;
  for (std::size_t i = 0; i < pool.size() && picks.size() < static_cast<std::size_t>(k); ++i) {
    const std::size_t j = i + rng.index(pool.size() - i);
    std::swap(pool[i], pool[j]);
    picks.push_back(pool[i]);
  }
  while (picks.size() < static_cast<std::size_t>(k)) picks.push_back(usable[rng.index(usable.size())]);

  Dictionary psi;
  psi.atoms.resize(n, k);
  for (int j = 0; j < k; ++j) {
    const auto& w = windows[picks[j]].samples;
    if (w.size() != n) throw DimensionError("windows differ in length");
    psi.atoms.col(j) = w / w.norm();
  }
  return psi;
}

LassoResult sparse_code_detailed(const SignalWindow& x, const Dictionary& psi,
                                 double lambda, double lipschitz) {
  check_window(x, psi);
  return solve_lasso(psi.atoms, x.samples, lambda, LassoOptions{}, lipschitz);
}

SparseCode sparse_code(const SignalWindow& x, const Dictionary& psi, double lambda) {
  return {sparse_code_detailed(x, psi, lambda).theta};
}

std::vector<SparseCode> odl_batch_step(OdlState& state,
                                       const std::vector<const SignalWindow*>& batch,
                                       double lambda) {
  const double lip = spectral_norm_sq(state.psi.atoms, 1e-4, &state.power_vec) * (1.0 + 1e-3);
  std::vector<SparseCode> codes;
  codes.reserve(batch.size());
  for (const SignalWindow* x : batch) {
    codes.push_back({sparse_code_detailed(*x, state.psi, lambda, lip).theta});
    const Eigen::VectorXd& theta = codes.back().coeffs;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
      if (theta[j] == 0.0) continue;
      state.acc_gram.col(j).noalias() += theta[j] * theta;
      state.acc_cross.col(j).noalias() += theta[j] * x->samples;
    }
    ++state.t;
  }
  update_atoms(state);
  return codes;
}

SparseCode odl_step(OdlState& state, const SignalWindow& x, double lambda) {
  return odl_batch_step(state, {&x}, lambda).front();
}

Dictionary odl_train(const std::vector<SignalWindow>& windows, const OdlConfig& cfg,
                     OdlTrainStats* stats) {
  const Eigen::Index n = window_length(windows);
  const int k = resolved_atom_count(cfg, n);
  const double lambda = resolved_lambda(cfg, n);
  if (k < n) throw Error("atom count must be >= window length");
  if (cfg.epochs < 1) throw Error("epochs must be >= 1");
  if (cfg.batch_size < 1) throw Error("batch size must be >= 1");

  OdlState state = make_odl_state(init_dictionary(windows, k, cfg.seed));
  RandomStream rng(derive_seed(cfg.seed, 1));
  std::vector<std::size_t> order(windows.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

    std::vector<int> usage(k, 0);
    std::vector<double> error(windows.size(), 0.0);
    double objective_sum = 0.0;
    std::vector<const SignalWindow*> batch;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      batch.clear();
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      for (std::size_t i = start; i < stop; ++i) batch.push_back(&windows[order[i]]);
      const Dictionary before = state.psi;
      const auto codes = odl_batch_step(state, batch, lambda);
      for (std::size_t b = 0; b < codes.size(); ++b) {
        const auto& theta = codes[b].coeffs;
        for (Eigen::Index j = 0; j < k; ++j) usage[j] += theta[j] != 0.0;
        const double err = (batch[b]->samples - before.atoms * theta).squaredNorm();
        error[order[start + b]] = err;
        objective_sum += 0.5 * err + lambda * theta.lpNorm<1>();
      }
    }

    // Replace dead atoms with the worst-represented windows of this epoch.
    std::vector<std::size_t> worst(windows.size());
    std::iota(worst.begin(), worst.end(), std::size_t{0});
    std::stable_sort(worst.begin(), worst.end(),
                     [&](std::size_t a, std::size_t b) { return error[a] > error[b]; });
    std::size_t next = 0;
    int replaced = 0;
    for (int j = 0; j < k; ++j) {
      if (usage[j] > cfg.dead_atom_threshold) continue;
      while (next < worst.size() && windows[worst[next]].samples.norm() == 0.0) ++next;
      if (next == worst.size()) break;
      const auto& w = windows[worst[next++]].samples;
      state.psi.atoms.col(j) = w / w.norm();
      state.acc_gram.row(j).setZero();
      state.acc_gram.col(j).setZero();
      state.acc_cross.col(j).setZero();
      ++replaced;
    }
    if (stats) {
      stats->replaced_per_epoch.push_back(replaced);
      stats->mean_objective_per_epoch.push_back(objective_sum / static_cast<double>(windows.size()));
    }
  }

  Dictionary out = std::move(state.psi);
  for (Eigen::Index j = 0; j < out.k(); ++j) {
    const double norm = out.atoms.col(j).norm();
    if (norm > 0.0) out.atoms.col(j) /= norm;
  }
  return out;
}

std::vector<SparseCode> batch_sparse_code(const std::vector<SignalWindow>& windows,
                                          const Dictionary& psi, double lambda) {
  std::vector<SparseCode> codes(windows.size());
  if (windows.empty()) return codes;
  const double lip = spectral_norm_sq(psi.atoms) * (1.0 + 1e-3);
  parallel_for(windows.size(), [&](std::size_t i) {
    codes[i] = {sparse_code_detailed(windows[i], psi, lambda, lip).theta};
  });
  return codes;
}

}  // namespace ddcs
