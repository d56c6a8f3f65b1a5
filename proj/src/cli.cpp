#include "ddcs/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include <CLI11.hpp>

#include "ddcs/binary_io.hpp"
#include "ddcs/error.hpp"
#include "ddcs/parallel.hpp"
#include "ddcs/random.hpp"

namespace ddcs::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raw option values; copied into CliCommand once config and flags are merged.
struct Bindings {
  std::string format = "csv";
  std::string mode = "factored";
  std::vector<std::string> methods{"smt_odl", "gaussian_odl", "smt_dctdwt", "gaussian_dctdwt"};
  std::vector<double> cr_list{2, 4, 6, 8, 10};
  std::uint64_t seed = 42;
  double lambda_rec = 0.0;
  double noise_snr = 0.0;
  double epsilon = 0.0;
  bool no_refine = false;
  bool timing = false;
  std::string rsnr_dump;
};

struct Parser {
  CLI::App app{"Data-driven compressive sensing for biosignals", "ddcs"};
  CliCommand cmd;
  Bindings b;
  std::map<std::string, CLI::App*> subs;
};

const std::vector<std::string> kMethodNames{"smt_odl", "gaussian_odl", "smt_dctdwt",
                                            "gaussian_dctdwt"};

void add_config(CLI::App* sub, Parser& p) {
  sub->add_option("--config", p.cmd.config, "key = value file; explicit flags win");
}

void add_preprocess(CLI::App* sub, Parser& p) {
  auto& pre = p.cmd.experiment.preprocess;
  sub->add_option("--baseline-1", pre.baseline_window_1, "first median window (s)")
      ->capture_default_str();
  sub->add_option("--baseline-2", pre.baseline_window_2, "second median window (s)")
      ->capture_default_str();
  sub->add_option("--cutoff", pre.lowpass_cutoff, "lowpass cutoff (Hz)")->capture_default_str();
  sub->add_option("--fir-order", pre.fir_order, "lowpass FIR order (even)")->capture_default_str();
}

void add_split(CLI::App* sub, Parser& p) {
  auto& pre = p.cmd.experiment.preprocess;
  sub->add_option("--train-count", pre.train_count, "leading windows used for training")
      ->capture_default_str();
  sub->add_option("--test-count", pre.test_count, "windows after those held out for testing")
      ->capture_default_str();
}

void add_training(CLI::App* sub, Parser& p) {
  auto& odl = p.cmd.experiment.odl;
  auto& smt = p.cmd.experiment.smt;
  sub->add_option("--atoms", odl.k, "dictionary atoms, 0 means 2n")->capture_default_str();
  sub->add_option("--lambda", odl.lambda, "sparse-coding weight, 0 means 1.2/sqrt(n)")
      ->capture_default_str();
  sub->add_option("--epochs", odl.epochs, "dictionary-learning passes")->capture_default_str();
  sub->add_option("--batch-size", odl.batch_size, "windows per dictionary update")
      ->capture_default_str();
  sub->add_option("--dead-atom-threshold", odl.dead_atom_threshold,
                  "atoms used at most this often per epoch are replaced")
      ->capture_default_str();
  sub->add_option("--mode", p.b.mode, "gram solver: paper|factored")
      ->check(CLI::IsMember({"paper", "factored"}))
      ->capture_default_str();
  sub->add_option("--beta", smt.beta, "nuclear-norm weight (paper mode)")->capture_default_str();
  sub->add_option("--max-iter", smt.max_iter, "gram solver iterations")->capture_default_str();
  sub->add_option("--step-size", smt.step_size, "initial gradient step (factored mode)")
      ->capture_default_str();
  sub->add_option("--tol-feas", smt.tol_feas, "feasibility tolerance")->capture_default_str();
  sub->add_option("--tol-conv", smt.tol_conv, "convergence tolerance")->capture_default_str();
  sub->add_option("--pinv-cutoff", smt.pinv_cutoff,
                  "relative singular-value cutoff of the dictionary pseudoinverse")
      ->capture_default_str();
  sub->add_flag("--no-refine", p.b.no_refine, "skip the direct refinement of Phi (default off)");
}

void add_recovery(CLI::App* sub, Parser& p) {
  auto& rec = p.cmd.experiment.recovery;
  sub->add_option("--lambda-rec", p.b.lambda_rec, "recovery weight (default auto)");
  sub->add_option("--rec-max-iter", rec.max_iter, "recovery iterations")->capture_default_str();
  sub->add_option("--rec-tol", rec.tol, "recovery KKT tolerance")->capture_default_str();
}

void add_seed(CLI::App* sub, Parser& p) {
  sub->add_option("--seed", p.b.seed, "seed of every random stream")->capture_default_str();
}

void add_noise(CLI::App* sub, Parser& p) {
  sub->add_option("--noise-snr", p.b.noise_snr, "measurement noise SNR in dB (default none)");
}

void add_selection(CLI::App* sub, Parser& p) {
  sub->add_option("--offset", p.cmd.offset, "first window to use")->capture_default_str();
  sub->add_option("--count", p.cmd.count, "windows to use, 0 means all remaining")
      ->capture_default_str();
}

void build(Parser& p) {
  CLI::App& app = p.app;
  app.require_subcommand(1, 1);
  app.set_help_flag("-h,--help", "print help");

  auto* ingest = app.add_subcommand("ingest", "preprocess a recording into windows");
  add_config(ingest, p);
  ingest->add_option("--input", p.cmd.input, "recording (csv or raw int16)");
  ingest->add_option("--format", p.b.format, "csv|raw-i16le")
      ->check(CLI::IsMember({"csv", "raw-i16le"}))
      ->capture_default_str();
  ingest->add_option("--fs", p.cmd.sampling_rate, "sampling rate (Hz)")->capture_default_str();
  ingest->add_option("--window", p.cmd.experiment.preprocess.window_length, "window length n")
      ->capture_default_str();
  ingest->add_option("--stride", p.cmd.experiment.preprocess.stride, "window stride")
      ->capture_default_str();
  add_preprocess(ingest, p);
  ingest->add_option("--out", p.cmd.out, "window file to write");

  auto* train = app.add_subcommand("train", "learn a dictionary and sensing matrix");
  add_config(train, p);
  train->add_option("--windows", p.cmd.windows, "window file");
  add_split(train, p);
  add_training(train, p);
  train->add_option("--cr", p.cmd.cr, "compression ratio n/m")->capture_default_str();
  add_seed(train, p);
  train->add_option("--trace", p.cmd.trace, "write the gram solver trace as csv");
  train->add_option("--out", p.cmd.out, "bundle to write");

  auto* compress = app.add_subcommand("compress", "measure windows with a bundle's Phi");
  add_config(compress, p);
  compress->add_option("--bundle", p.cmd.bundle, "trained bundle");
  compress->add_option("--windows", p.cmd.windows, "window file");
  add_selection(compress, p);
  add_noise(compress, p);
  add_seed(compress, p);
  compress->add_option("--out", p.cmd.out, "measurement file to write");

  auto* reconstruct = app.add_subcommand("reconstruct", "recover windows from measurements");
  add_config(reconstruct, p);
  reconstruct->add_option("--bundle", p.cmd.bundle, "trained bundle");
  reconstruct->add_option("--measurements", p.cmd.measurements, "measurement file");
  add_recovery(reconstruct, p);
  reconstruct->add_option("--epsilon", p.b.epsilon,
                          "noise budget; windows whose residual exceeds it are counted");
  reconstruct->add_option("--out", p.cmd.out, "window file to write");

  auto* evaluate = app.add_subcommand("evaluate", "score a bundle on held-out windows");
  add_config(evaluate, p);
  evaluate->add_option("--bundle", p.cmd.bundle, "trained bundle");
  evaluate->add_option("--windows", p.cmd.windows, "window file");
  add_selection(evaluate, p);
  evaluate->add_option("--lambda", p.cmd.experiment.odl.lambda,
                       "sparse-coding weight for test codes, 0 means 1.2/sqrt(n)")
      ->capture_default_str();
  add_recovery(evaluate, p);
  add_noise(evaluate, p);
  add_seed(evaluate, p);
  evaluate->add_flag("--timing", p.b.timing, "fill wall_time_s (default off)");
  evaluate->add_option("--rsnr-dump", p.b.rsnr_dump, "per-window rsnr csv");
  evaluate->add_option("--report", p.cmd.report, "metrics csv to write");

  auto* sweep = app.add_subcommand("sweep", "compare all methods across compression ratios");
  add_config(sweep, p);
  sweep->add_option("--windows", p.cmd.windows, "window file");
  add_split(sweep, p);
  add_training(sweep, p);
  sweep->add_option("--cr-list", p.b.cr_list, "compression ratios")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--methods", p.b.methods, "subset of " + CLI::detail::join(kMethodNames, ","))
      ->delimiter(',')
      ->check(CLI::IsMember(kMethodNames))
      ->capture_default_str();
  add_recovery(sweep, p);
  add_noise(sweep, p);
  add_seed(sweep, p);
  sweep->add_flag("--timing", p.b.timing, "fill wall_time_s (default off)");
  sweep->add_option("--rsnr-dump", p.b.rsnr_dump, "per-window rsnr csv");
  sweep->add_option("--report", p.cmd.report, "metrics csv to write");

  for (auto* sub : {ingest, train, compress, reconstruct, evaluate, sweep})
    p.subs[sub->get_name()] = sub;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void apply_config(CLI::App* sub, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config") throw UsageError("config files cannot include other configs");
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) throw UsageError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

bool given(CLI::App* sub, const std::string& name) {
  const CLI::Option* opt = sub->get_option_no_throw(name);
  return opt && opt->count() > 0;
}

void require(const std::filesystem::path& value, const std::string& name) {
  if (value.empty()) throw UsageError(name + " is required");
}

void finish(Parser& p, CLI::App* sub) {
  if (!p.cmd.config.empty()) apply_config(sub, p.cmd.config);
  CliCommand& c = p.cmd;
  const std::string name = sub->get_name();
  if (name == "ingest") c.kind = CommandKind::ingest;
  if (name == "train") c.kind = CommandKind::train;
  if (name == "compress") c.kind = CommandKind::compress;
  if (name == "reconstruct") c.kind = CommandKind::reconstruct;
  if (name == "evaluate") c.kind = CommandKind::evaluate;
  if (name == "sweep") c.kind = CommandKind::sweep;

  ExperimentConfig& e = c.experiment;
  c.format = parse_signal_format(p.b.format);
  e.smt.mode = parse_smt_mode(p.b.mode);
  e.odl.seed = e.smt.seed = e.seed = p.b.seed;
  e.cr_list = p.b.cr_list;
  e.methods.clear();
  for (const auto& m : p.b.methods) e.methods.push_back(parse_method(m));
  e.refine_phi = !p.b.no_refine;
  e.record_timing = p.b.timing;
  e.rsnr_dump_path = p.b.rsnr_dump;
  if (given(sub, "--lambda-rec")) e.recovery.lambda_rec = p.b.lambda_rec;
  if (given(sub, "--noise-snr")) e.noise_snr_db = p.b.noise_snr;
  if (given(sub, "--epsilon")) e.recovery.epsilon = p.b.epsilon;

  switch (c.kind) {
    case CommandKind::ingest:
      require(c.input, "--input");
      require(c.out, "--out");
      break;
    case CommandKind::train:
      require(c.windows, "--windows");
      require(c.out, "--out");
      break;
    case CommandKind::compress:
      require(c.bundle, "--bundle");
      require(c.windows, "--windows");
      require(c.out, "--out");
      break;
    case CommandKind::reconstruct:
      require(c.bundle, "--bundle");
      require(c.measurements, "--measurements");
      require(c.out, "--out");
      break;
    case CommandKind::evaluate:
      require(c.bundle, "--bundle");
      require(c.windows, "--windows");
      require(c.report, "--report");
      break;
    case CommandKind::sweep:
      require(c.windows, "--windows");
      require(c.report, "--report");
      for (double cr : e.cr_list)
        if (!(cr > 1.0)) throw UsageError("--cr-list entries must be > 1");
      if (e.methods.empty()) throw UsageError("--methods must not be empty");
      break;
  }
  if (c.offset < 0 || c.count < 0) throw UsageError("--offset and --count must be >= 0");
}

std::vector<SignalWindow> select_windows(const std::vector<SignalWindow>& all, std::int64_t offset,
                                         std::int64_t count) {
  const auto size = static_cast<std::int64_t>(all.size());
  if (offset >= size)
    throw Error("offset " + std::to_string(offset) + " beyond " + std::to_string(size) + " windows");
  const std::int64_t stop = count == 0 ? size : offset + count;
  if (stop > size)
    throw Error("requested windows [" + std::to_string(offset) + ", " + std::to_string(stop) +
                ") but file has " + std::to_string(size));
  return {all.begin() + offset, all.begin() + stop};
}

void run_ingest(const CliCommand& c) {
  const RawRecording rec = read_signal(c.input, c.format, c.sampling_rate);
  const auto windows = window_signal(preprocess(rec, c.experiment.preprocess), c.experiment.preprocess);
  if (windows.empty()) throw Error("recording yields no windows");
  save_windows(windows, c.out);
  std::clog << "[ingest] " << windows.size() << " windows of " << c.experiment.preprocess.window_length
            << " samples\n";
}

void run_train(const CliCommand& c) {
  const auto windows = load_windows(c.windows);
  const auto split = split_train_test(windows, c.experiment.preprocess);
  ExperimentConfig cfg = c.experiment;
  const int n = static_cast<int>(split.train.front().samples.size());
  cfg.smt.target_m = target_m_for(n, c.cr);
  const CtsmdResult result = run_ctsmd(split.train, cfg);
  if (!c.trace.empty()) write_trace_csv(result.sensing.trace, c.trace);
  save_bundle(result.bundle, c.out);
  std::clog << "[train] n=" << n << " m=" << cfg.smt.target_m << " k=" << result.bundle.k
            << " delta=" << result.bundle.achieved_delta << "\n";
}

void run_compress(const CliCommand& c) {
  const TrainedBundle bundle = load_bundle(c.bundle);
  const auto windows = select_windows(load_windows(c.windows), c.offset, c.count);
  std::vector<MeasurementVector> ys;
  ys.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto index = c.offset + static_cast<std::int64_t>(i);
    ys.push_back(encode(bundle.phi, windows[i], index));
    if (c.experiment.noise_snr_db)
      add_measurement_noise(ys.back(), *c.experiment.noise_snr_db,
                            derive_seed(c.experiment.seed, static_cast<std::uint64_t>(index)));
  }
  save_measurements(ys, c.out);
  std::clog << "[compress] " << ys.size() << " measurement vectors of " << bundle.m << "\n";
}

void run_reconstruct(const CliCommand& c) {
  const TrainedBundle bundle = load_bundle(c.bundle);
  const auto ys = load_measurements(c.measurements);
  std::vector<SignalWindow> out(ys.size());
  std::vector<double> residuals(ys.size());
  parallel_for(ys.size(), [&](std::size_t i) {
    const RecoveryResult r = recover_detailed(ys[i], bundle.phi, bundle.psi, c.experiment.recovery);
    residuals[i] = r.residual_norm;
    out[i] = reconstruct(bundle.psi, r.theta, ys[i].window_index * static_cast<std::int64_t>(bundle.n));
  });
  save_windows(out, c.out);
  std::clog << "[reconstruct] " << out.size() << " windows, mean residual "
            << mean_of(residuals) << "\n";
  if (const auto eps = c.experiment.recovery.epsilon) {
    std::size_t over = 0;
    for (double r : residuals) over += r > *eps;
    std::clog << "[reconstruct] " << over << " windows exceed epsilon " << *eps << "\n";
  }
}

void run_evaluate(const CliCommand& c) {
  const auto start = std::chrono::steady_clock::now();
  const TrainedBundle bundle = load_bundle(c.bundle);
  const auto windows = select_windows(load_windows(c.windows), c.offset, c.count);
  const double lambda = resolved_lambda(c.experiment.odl, bundle.n);
  const Evaluation ev = evaluate_pair(bundle.phi, bundle.psi, windows, c.experiment.recovery,
                                      lambda, c.experiment.noise_snr_db, c.experiment.seed);
  MetricsRow row;
  row.method = MethodCombo::smt_odl;
  row.cr = compression_ratio(static_cast<int>(bundle.n), static_cast<int>(bundle.m));
  row.m = static_cast<int>(bundle.m);
  row.empirical_delta = ev.empirical_delta;
  row.mean_rsnr_db = mean_of(ev.rsnr_db);
  row.median_rsnr_db = median_of(ev.rsnr_db);
  row.seed = bundle.seed;
  row.rsnr = ev.rsnr_db;
  if (c.experiment.record_timing)
    row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit_report({row}, c.report);
  if (!c.experiment.rsnr_dump_path.empty()) emit_rsnr_dump({row}, c.experiment.rsnr_dump_path);
  std::clog << "[evaluate] " << windows.size() << " windows, mean rsnr " << row.mean_rsnr_db
            << " dB, delta " << row.empirical_delta << "\n";
}

void run_sweep(const CliCommand& c) {
  const auto windows = load_windows(c.windows);
  const auto split = split_train_test(windows, c.experiment.preprocess);
  const auto rows = sweep(split.train, split.test, c.experiment);
  emit_report(rows, c.report);
  if (!c.experiment.rsnr_dump_path.empty()) emit_rsnr_dump(rows, c.experiment.rsnr_dump_path);
}

std::string help_for(Parser& p, CLI::App* active) {
  return active == &p.app ? p.app.help() : active->help("ddcs");
}

}  // namespace

const char* to_string(CommandKind kind) {
  switch (kind) {
    case CommandKind::ingest: return "ingest";
    case CommandKind::train: return "train";
    case CommandKind::compress: return "compress";
    case CommandKind::reconstruct: return "reconstruct";
    case CommandKind::evaluate: return "evaluate";
    case CommandKind::sweep: return "sweep";
  }
  return "unknown";
}

ParseOutcome parse_args(const std::vector<std::string>& args) {
  auto p = std::make_unique<Parser>();
  build(*p);
  ParseOutcome out;
  // CLI11 takes arguments in reverse order when given a vector.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  CLI::App* active = &p->app;
  try {
    p->app.parse(reversed);
    for (auto& [name, sub] : p->subs)
      if (sub->parsed()) active = sub;
    finish(*p, active);
  } catch (const CLI::CallForHelp&) {
    for (auto& [name, sub] : p->subs)
      if (sub->parsed()) active = sub;
    out.output = help_for(*p, active);
    out.exit_code = 0;
    return out;
  } catch (const CLI::ParseError& e) {
    for (auto& [name, sub] : p->subs)
      if (sub->parsed()) active = sub;
    out.output = std::string("error: usage: ") + e.what() + "\n" + help_for(*p, active);
    out.exit_code = 2;
    return out;
  } catch (const std::exception& e) {
    out.output = std::string("error: usage: ") + e.what() + "\n" + help_for(*p, active);
    out.exit_code = 2;
    return out;
  }
  out.command = std::move(p->cmd);
  return out;
}

std::string help_text() {
  Parser p;
  build(p);
  std::string out = p.app.help();
  for (const char* name : {"ingest", "train", "compress", "reconstruct", "evaluate", "sweep"})
    out += "\n" + p.subs.at(name)->help("ddcs");
  return out;
}

int dispatch(const CliCommand& cmd) {
  try {
    switch (cmd.kind) {
      case CommandKind::ingest: run_ingest(cmd); break;
      case CommandKind::train: run_train(cmd); break;
      case CommandKind::compress: run_compress(cmd); break;
      case CommandKind::reconstruct: run_reconstruct(cmd); break;
      case CommandKind::evaluate: run_evaluate(cmd); break;
      case CommandKind::sweep: run_sweep(cmd); break;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << to_string(cmd.kind) << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  ParseOutcome parsed = parse_args(args);
  if (!parsed.command) {
    (parsed.exit_code == 0 ? std::cout : std::cerr) << parsed.output;
    return parsed.exit_code;
  }
  return dispatch(*parsed.command);
}

}  // namespace ddcs::cli
