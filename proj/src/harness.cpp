#include "ddcs/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>

#include "ddcs/baselines.hpp"
#include "ddcs/binary_io.hpp"
#include "ddcs/error.hpp"
#include "ddcs/parallel.hpp"
#include "ddcs/random.hpp"

namespace ddcs {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename Fn>
auto run_stage(const char* name, std::vector<std::pair<std::string, double>>& timings, Fn&& fn) {
  const auto start = Clock::now();
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      timings.emplace_back(name, seconds_since(start));
      std::clog << "[ctsmd] " << name << " " << timings.back().second << " s\n";
    } else {
      auto result = fn();
      timings.emplace_back(name, seconds_since(start));
      std::clog << "[ctsmd] " << name << " " << timings.back().second << " s\n";
      return result;
    }
  } catch (const std::exception& e) {
    throw Error(std::string(name) + ": " + e.what());
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

bool uses_odl(MethodCombo m) { return m == MethodCombo::smt_odl || m == MethodCombo::gaussian_odl; }
bool uses_smt(MethodCombo m) { return m == MethodCombo::smt_odl || m == MethodCombo::smt_dctdwt; }

}  // namespace

MethodCombo parse_method(std::string_view name) {
  for (MethodCombo m : all_methods())
    if (name == to_string(m)) return m;
  throw Error("unknown method '" + std::string(name) + "'");
}

const char* to_string(MethodCombo method) {
  switch (method) {
    case MethodCombo::smt_odl: return "smt_odl";
    case MethodCombo::gaussian_odl: return "gaussian_odl";
    case MethodCombo::smt_dctdwt: return "smt_dctdwt";
    case MethodCombo::gaussian_dctdwt: return "gaussian_dctdwt";
  }
  return "unknown";
}

std::vector<MethodCombo> all_methods() {
  return {MethodCombo::smt_odl, MethodCombo::gaussian_odl, MethodCombo::smt_dctdwt,
          MethodCombo::gaussian_dctdwt};
}

int target_m_for(int n, double cr) {
  if (!(cr > 1.0) || !std::isfinite(cr)) throw Error("compression ratio must be > 1");
  const int m = std::max(1, static_cast<int>(std::lround(n / cr)));
  if (m >= n) throw Error("compression ratio too close to 1 for n = " + std::to_string(n));
  return m;
}

double compression_ratio(int n, int m) {
  if (m == 0) throw Error("m must be >= 1");
  return static_cast<double>(n) / m;
}

double rsnr_db(const SignalWindow& x, const SignalWindow& xhat) {
  if (x.samples.size() != xhat.samples.size()) throw DimensionError("window lengths differ");
  const double signal = x.samples.norm();
  if (signal == 0.0) throw Error("zero reference window");
  const double error = (x.samples - xhat.samples).norm();
  if (error == 0.0) return kRsnrCapDb;
  return std::clamp(20.0 * std::log10(signal / error), -kRsnrCapDb, kRsnrCapDb);
}

SensingTraining train_sensing(const Dictionary& psi, const std::vector<SparseCode>& codes,
                              SmtConfig cfg, int m, bool refine) {
  cfg.target_m = m;
  SensingTraining out;
  if (cfg.mode == SmtMode::paper) {
    GramSolution gram = solve_gram_paper(codes, cfg);
    out.solver_delta = gram.delta;
    out.trace = gram.history;
    const GramFactor factor = factor_gram(gram.Y, m);
    out.phi = derive_phi(factor.A, psi, cfg.pinv_cutoff);
    out.gram = std::move(gram);
  } else {
    FactoredSolution fs = solve_gram_factored(codes, cfg);
    out.solver_delta = fs.delta_hat;
    out.trace = std::move(fs.history);
    out.phi = derive_phi(fs.A, psi, cfg.pinv_cutoff);
    if (refine) {
      PhiRefinement r = refine_phi(out.phi, psi, codes, cfg);
      out.phi = std::move(r.phi);
      const int offset = out.trace.empty() ? 0 : out.trace.back().iteration;
      for (auto row : r.history) {
        row.iteration += offset;
        out.trace.push_back(row);
      }
    }
  }
  out.train_delta = empirical_delta(out.phi, psi, codes);
  return out;
}

CtsmdResult run_ctsmd(const std::vector<SignalWindow>& train, const ExperimentConfig& cfg) {
  if (train.empty()) throw Error("no training windows");
  if (cfg.smt.target_m < 1) throw Error("target_m must be set");
  CtsmdResult out;
  auto& timings = out.stage_seconds;
  const Eigen::Index n = train.front().samples.size();
  const double lambda = resolved_lambda(cfg.odl, n);

  Dictionary psi = run_stage("odl_train", timings, [&] { return odl_train(train, cfg.odl); });
  auto codes = run_stage("batch_sparse_code", timings,
                         [&] { return batch_sparse_code(train, psi, lambda); });
  codes = run_stage("normalize_codes", timings, [&] { return normalize_codes(codes); });
  out.sensing = run_stage("sensing_matrix_training", timings, [&] {
    return train_sensing(psi, codes, cfg.smt, cfg.smt.target_m, cfg.refine_phi);
  });

  TrainedBundle& b = out.bundle;
  b.phi = out.sensing.phi;
  b.psi = std::move(psi);
  b.n = static_cast<std::uint32_t>(n);
  b.m = static_cast<std::uint32_t>(cfg.smt.target_m);
  b.k = static_cast<std::uint32_t>(b.psi.k());
  b.achieved_delta = out.sensing.train_delta;
  b.seed = cfg.odl.seed;
  if (auto violations = validate_bundle(b); !violations.empty())
    throw Error("bundle: " + violations.front());
  return out;
}

Evaluation evaluate_pair(const SensingMatrix& phi, const Dictionary& psi,
                         const std::vector<SignalWindow>& test, const RecoveryConfig& rcfg,
                         double code_lambda, std::optional<double> noise_snr_db,
                         std::uint64_t noise_seed) {
  if (test.empty()) throw Error("no test windows");
  Evaluation out;
  out.rsnr_db.resize(test.size());
  parallel_for(test.size(), [&](std::size_t i) {
    MeasurementVector y = encode(phi, test[i], static_cast<std::int64_t>(i));
    if (noise_snr_db) add_measurement_noise(y, *noise_snr_db, derive_seed(noise_seed, i));
    const SparseCode theta = recover(y, phi, psi, rcfg);
    out.rsnr_db[i] = rsnr_db(test[i], reconstruct(psi, theta, test[i].source_offset));
  });
  const auto codes = normalize_codes(batch_sparse_code(test, psi, code_lambda));
  out.empirical_delta = empirical_delta(phi, psi, codes);
  return out;
}

Evaluation evaluate(const TrainedBundle& bundle, const std::vector<SignalWindow>& test,
                    const RecoveryConfig& rcfg, double code_lambda) {
  return evaluate_pair(bundle.phi, bundle.psi, test, rcfg, code_lambda);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

std::vector<MetricsRow> sweep(const std::vector<SignalWindow>& train,
                              const std::vector<SignalWindow>& test,
                              const ExperimentConfig& cfg) {
  if (train.empty() || test.empty()) throw Error("sweep needs train and test windows");
  if (cfg.methods.empty()) throw Error("no methods selected");
  for (double cr : cfg.cr_list)
    if (!(cr > 1.0)) throw Error("compression ratios must be > 1");
  const int n = static_cast<int>(train.front().samples.size());
  const double lambda = resolved_lambda(cfg.odl, n);

  const bool need_odl = std::any_of(cfg.methods.begin(), cfg.methods.end(), uses_odl);
  const bool need_dct = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                    [](MethodCombo m) { return !uses_odl(m); });
  std::vector<std::pair<std::string, double>> timings;

  struct Basis {
    Dictionary psi;
    std::vector<SparseCode> train_codes;
  };
  std::map<bool, Basis> bases;  // keyed by uses_odl
  if (need_odl) {
    Basis b;
    b.psi = run_stage("odl_train", timings, [&] { return odl_train(train, cfg.odl); });
    b.train_codes = run_stage("batch_sparse_code", timings, [&] {
      return normalize_codes(batch_sparse_code(train, b.psi, lambda));
    });
    bases.emplace(true, std::move(b));
  }
  if (need_dct) {
    Basis b;
    b.psi = dct_dwt_dictionary(n);
    b.train_codes = run_stage("batch_sparse_code_dctdwt", timings, [&] {
      return normalize_codes(batch_sparse_code(train, b.psi, lambda));
    });
    bases.emplace(false, std::move(b));
  }

  std::vector<MetricsRow> rows;
  for (MethodCombo method : cfg.methods) {
    for (double cr : cfg.cr_list) {
      MetricsRow row;
      row.method = method;
      row.cr = cr;
      row.seed = cfg.seed;
      const auto start = Clock::now();
      try {
        row.m = target_m_for(n, cr);
        const Basis& basis = bases.at(uses_odl(method));
        SensingMatrix phi;
        if (uses_smt(method)) {
          SmtConfig smt = cfg.smt;
          smt.seed = derive_seed(cfg.smt.seed, static_cast<std::uint64_t>(row.m));
          phi = train_sensing(basis.psi, basis.train_codes, smt, row.m, cfg.refine_phi).phi;
        } else {
          phi = gaussian_phi(row.m, n, derive_seed(cfg.seed, static_cast<std::uint64_t>(row.m)));
        }
        Evaluation ev = evaluate_pair(phi, basis.psi, test, cfg.recovery, lambda,
                                      cfg.noise_snr_db, cfg.seed);
        row.empirical_delta = ev.empirical_delta;
        row.mean_rsnr_db = mean_of(ev.rsnr_db);
        row.median_rsnr_db = median_of(ev.rsnr_db);
        row.rsnr = std::move(ev.rsnr_db);
      } catch (const std::exception& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.empirical_delta = row.mean_rsnr_db = row.median_rsnr_db = nan;
        row.diagnostic = e.what();
        std::clog << "[sweep] " << to_string(method) << " cr=" << cr << " failed: " << e.what()
                  << "\n";
      }
      row.wall_time_s = cfg.record_timing ? seconds_since(start) : 0.0;
      std::clog << "[sweep] " << to_string(method) << " cr=" << cr << " m=" << row.m
                << " delta=" << row.empirical_delta << " mean_rsnr=" << row.mean_rsnr_db << "\n";
      rows.push_back(std::move(row));
    }
  }
  for (const auto& w : monotonicity_warnings(rows)) std::clog << "[sweep] warning: " << w << "\n";
  return rows;
}

std::vector<std::string> monotonicity_warnings(const std::vector<MetricsRow>& rows,
                                               double slack_db) {
  std::vector<std::string> out;
  for (MethodCombo method : all_methods()) {
    std::vector<const MetricsRow*> cells;
    for (const auto& r : rows)
      if (r.method == method && r.diagnostic.empty()) cells.push_back(&r);
    std::sort(cells.begin(), cells.end(),
              [](const MetricsRow* a, const MetricsRow* b) { return a->cr < b->cr; });
    for (std::size_t i = 1; i < cells.size(); ++i)
      if (cells[i]->mean_rsnr_db > cells[i - 1]->mean_rsnr_db + slack_db)
        out.push_back(std::string(to_string(method)) + ": mean rsnr rises from cr " +
                      format_number(cells[i - 1]->cr) + " to cr " + format_number(cells[i]->cr));
  }
  return out;
}

std::string format_report(const std::vector<MetricsRow>& rows) {
  std::string out(kReportHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += to_string(r.method);
    for (double v : {r.cr, static_cast<double>(r.m), r.empirical_delta, r.mean_rsnr_db,
                     r.median_rsnr_db, r.wall_time_s}) {
      out += ',';
      out += format_number(v);
    }
    out += ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

std::vector<MetricsRow> parse_report(std::string_view text) {
  std::vector<MetricsRow> rows;
  bool header = true;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    const std::string line(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (line.empty()) continue;
    if (header) {
      if (line != kReportHeader) throw FormatError("unexpected report header");
      header = false;
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1)
      fields.push_back(line.substr(start, pos - start));
    fields.push_back(line.substr(start));
    if (fields.size() != 8) throw FormatError("report row needs 8 fields");
    MetricsRow r;
    r.method = parse_method(fields[0]);
    r.cr = std::stod(fields[1]);
    r.m = std::stoi(fields[2]);
    r.empirical_delta = std::stod(fields[3]);
    r.mean_rsnr_db = std::stod(fields[4]);
    r.median_rsnr_db = std::stod(fields[5]);
    r.wall_time_s = std::stod(fields[6]);
    r.seed = std::stoull(fields[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit_report(const std::vector<MetricsRow>& rows, const std::filesystem::path& path) {
  write_file_atomic(path, format_report(rows));
}

void emit_rsnr_dump(const std::vector<MetricsRow>& rows, const std::filesystem::path& path) {
  std::string out = "method,cr,window,rsnr_db\n";
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.rsnr.size(); ++i)
      out += std::string(to_string(r.method)) + ',' + format_number(r.cr) + ',' +
             std::to_string(i) + ',' + format_number(r.rsnr[i]) + '\n';
  write_file_atomic(path, out);
}

}  // namespace ddcs
