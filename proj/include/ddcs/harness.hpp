#ifndef DDCS_HARNESS_HPP
#define DDCS_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ddcs/ingest.hpp"
#include "ddcs/model_store.hpp"
#include "ddcs/odl.hpp"
#include "ddcs/smt.hpp"
#include "ddcs/sparse_recovery.hpp"

namespace ddcs {

enum class MethodCombo { smt_odl, gaussian_odl, smt_dctdwt, gaussian_dctdwt };

MethodCombo parse_method(std::string_view name);
const char* to_string(MethodCombo method);
std::vector<MethodCombo> all_methods();

struct ExperimentConfig {
  PreprocessConfig preprocess;
  OdlConfig odl;
  SmtConfig smt;
  RecoveryConfig recovery;
  std::vector<double> cr_list{2, 4, 6, 8, 10};
  std::vector<MethodCombo> methods = all_methods();
  std::filesystem::path output_path;
  /// Seed of the Gaussian baselines and of measurement noise.
  std::uint64_t seed = 42;
  /// After the Gram solve, descend on Phi itself against the training codes.
  bool refine_phi = true;
  /// Gaussian measurement noise at this SNR (dB); unset means noise-free.
  std::optional<double> noise_snr_db;
  /// Fill wall_time_s; off by default so reports are reproducible bytewise.
  bool record_timing = false;
  std::filesystem::path rsnr_dump_path;
};

struct MetricsRow {
  MethodCombo method = MethodCombo::smt_odl;
  double cr = 0.0;
  int m = 0;
  double empirical_delta = 0.0;
  double mean_rsnr_db = 0.0;
  double median_rsnr_db = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
  std::string diagnostic;  // non-empty when the cell failed
  std::vector<double> rsnr;  // per test window
};

/// m = round(n / cr), at least 1 and below n.
int target_m_for(int n, double cr);
double compression_ratio(int n, int m);

inline constexpr double kRsnrCapDb = 300.0;

/// 20 log10(||x|| / ||x - xhat||), clamped to +-300 dB.
double rsnr_db(const SignalWindow& x, const SignalWindow& xhat);

struct SensingTraining {
  SensingMatrix phi;
  double train_delta = 0.0;   // re-measured on the training codes
  double solver_delta = 0.0;  // what the Gram solver reported
  std::optional<GramSolution> gram;
  std::vector<TraceRow> trace;
};

/// Gram solve (mode per cfg), factorization, Phi derivation and optional
/// refinement. `codes` are unit-norm training codes under `psi`.
SensingTraining train_sensing(const Dictionary& psi, const std::vector<SparseCode>& codes,
                              SmtConfig cfg, int m, bool refine);

struct CtsmdResult {
  TrainedBundle bundle;
  SensingTraining sensing;
  std::vector<std::pair<std::string, double>> stage_seconds;
};

/// One non-iterative co-training pass: dictionary learning, coding of the
/// training set, sensing-matrix training. cfg.smt.target_m must be set.
CtsmdResult run_ctsmd(const std::vector<SignalWindow>& train, const ExperimentConfig& cfg);

struct Evaluation {
  std::vector<double> rsnr_db;
  double empirical_delta = 0.0;  // on the test codes
};

/// encode -> recover -> reconstruct -> RSNR for every window, plus the
/// isometry constant measured on the test windows' own codes.
Evaluation evaluate_pair(const SensingMatrix& phi, const Dictionary& psi,
                         const std::vector<SignalWindow>& test, const RecoveryConfig& rcfg,
                         double code_lambda, std::optional<double> noise_snr_db = std::nullopt,
                         std::uint64_t noise_seed = 0);
Evaluation evaluate(const TrainedBundle& bundle, const std::vector<SignalWindow>& test,
                    const RecoveryConfig& rcfg, double code_lambda);

double mean_of(const std::vector<double>& v);
double median_of(std::vector<double> v);

/// Every (method, cr) cell in method-major order. ODL and DCT-DWT
/// dictionaries are shared across the sweep; SMT is retrained per cr.
std::vector<MetricsRow> sweep(const std::vector<SignalWindow>& train,
                              const std::vector<SignalWindow>& test,
                              const ExperimentConfig& cfg);

/// Methods whose mean RSNR rises by more than `slack_db` as cr increases.
std::vector<std::string> monotonicity_warnings(const std::vector<MetricsRow>& rows,
                                               double slack_db = 1.0);

inline constexpr std::string_view kReportHeader =
    "method,cr,m,empirical_delta,mean_rsnr_db,median_rsnr_db,wall_time_s,seed";

std::string format_report(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> parse_report(std::string_view text);
void emit_report(const std::vector<MetricsRow>& rows, const std::filesystem::path& path);

/// method,cr,window,rsnr_db for every test window.
void emit_rsnr_dump(const std::vector<MetricsRow>& rows, const std::filesystem::path& path);

}  // namespace ddcs

#endif  // DDCS_HARNESS_HPP
