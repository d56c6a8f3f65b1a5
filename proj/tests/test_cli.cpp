#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ddcs/cli.hpp"
#include "ddcs/ingest.hpp"
#include "ddcs/model_store.hpp"
#include "ddcs/sparse_recovery.hpp"
#include "test_util.hpp"

using namespace ddcs;
using ddcs::cli::CommandKind;
using ddcs::cli::parse_args;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult run_cli(const std::string& args, const ddcs_test::TempDir& dir) {
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + DDCS_CLI_PATH + "\" " + args + " >\"" + out.string() +
                          "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

}  // namespace

TEST(CliParse, TrainCommand) {
  const auto r = parse_args({"train", "--windows", "w.bin", "--cr", "10", "--out", "b.ddcs"});
  ASSERT_TRUE(r.command) << r.output;
  EXPECT_EQ(r.command->kind, CommandKind::train);
  EXPECT_EQ(r.command->windows, "w.bin");
  EXPECT_EQ(r.command->cr, 10.0);
  EXPECT_EQ(r.command->experiment.odl.epochs, 5);
  EXPECT_EQ(r.command->experiment.smt.mode, SmtMode::factored);
}

TEST(CliParse, SeedReachesEveryStream) {
  const auto r = parse_args({"train", "--windows", "w", "--out", "b", "--seed", "9", "--mode", "paper"});
  ASSERT_TRUE(r.command) << r.output;
  EXPECT_EQ(r.command->experiment.odl.seed, 9u);
  EXPECT_EQ(r.command->experiment.smt.seed, 9u);
  EXPECT_EQ(r.command->experiment.seed, 9u);
  EXPECT_EQ(r.command->experiment.smt.mode, SmtMode::paper);
}

TEST(CliParse, UsageErrors) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"train", "--bogus"}, {"train", "--out", "b"}, {"frobnicate"},
        {"sweep", "--windows", "w", "--report", "r", "--methods", "smt"},
        {"train", "--windows", "w", "--out", "b", "--cr", "ten"}}) {
    const auto r = parse_args(args);
    EXPECT_FALSE(r.command);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_EQ(r.output.rfind("error: usage: ", 0), 0u) << r.output;
  }
}

TEST(CliParse, HelpExitsZero) {
  const auto r = parse_args({"sweep", "--help"});
  EXPECT_FALSE(r.command);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.output.find("--cr-list"), std::string::npos);
}

TEST(CliParse, ConfigFileWithOverride) {
  ddcs_test::TempDir dir;
  write_text(dir / "exp.cfg",
             "# sweep settings\nwindows = w.bin\nreport = r.csv\ncr-list = 2,6\nepochs = 3\n"
             "methods = smt_odl,gaussian_odl\n");
  const auto r = parse_args({"sweep", "--config", (dir / "exp.cfg").string(), "--cr-list", "4,8"});
  ASSERT_TRUE(r.command) << r.output;
  EXPECT_EQ(r.command->windows, "w.bin");
  EXPECT_EQ(r.command->experiment.odl.epochs, 3);
  EXPECT_EQ(r.command->experiment.cr_list, (std::vector<double>{4, 8}));
  EXPECT_EQ(r.command->experiment.methods,
            (std::vector<MethodCombo>{MethodCombo::smt_odl, MethodCombo::gaussian_odl}));

  write_text(dir / "bad.cfg", "no-such-key = 1\n");
  EXPECT_EQ(parse_args({"sweep", "--config", (dir / "bad.cfg").string()}).exit_code, 2);
  EXPECT_EQ(parse_args({"sweep", "--config", (dir / "missing.cfg").string()}).exit_code, 2);
}

TEST(CliHelp, MatchesGolden) {
  EXPECT_EQ(cli::help_text(), slurp(std::filesystem::path(DDCS_GOLDEN_DIR) / "help.txt"));
}

TEST(CliRun, UnknownFlagExitsTwo) {
  ddcs_test::TempDir dir;
  const CliResult r = run_cli("train --bogus", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: usage: ", 0), 0u);
}

TEST(CliRun, MissingInputExitsOne) {
  ddcs_test::TempDir dir;
  const CliResult r = run_cli("train --windows /nonexistent/w.bin --out " + (dir / "b.ddcs").string(), dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: train: cannot open", 0), 0u) << r.err;
  EXPECT_FALSE(std::filesystem::exists(dir / "b.ddcs"));
}

TEST(CliRun, FullChain) {
  ddcs_test::TempDir dir;
  const std::string w = (dir / "w.ddcw").string(), b = (dir / "b.ddcs").string(),
                    y = (dir / "y.ddcm").string(), x = (dir / "x.ddcw").string(),
                    rep = (dir / "eval.csv").string(), trace = (dir / "trace.csv").string();
  CliResult r = run_cli(std::string("ingest --input ") + DDCS_SAMPLE_CSV + " --out " + w, dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto windows = load_windows(w);
  ASSERT_EQ(windows.size(), 337u);

  r = run_cli("train --windows " + w + " --train-count 250 --test-count 80 --epochs 1 --cr 4 --trace " +
                  trace + " --out " + b,
              dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const TrainedBundle bundle = load_bundle(b);
  EXPECT_EQ(bundle.m, 32u);
  EXPECT_EQ(bundle.n, 128u);
  EXPECT_EQ(slurp(trace).rfind("iteration,objective,max_violation,min_eigenvalue\n", 0), 0u);

  r = run_cli("compress --bundle " + b + " --windows " + w + " --offset 250 --count 20 --out " + y, dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ys = load_measurements(y);
  ASSERT_EQ(ys.size(), 20u);
  EXPECT_LT((ys[3].values - bundle.phi.matrix * windows[253].samples).cwiseAbs().maxCoeff(), 1e-12);

  r = run_cli("reconstruct --bundle " + b + " --measurements " + y + " --out " + x, dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto xs = load_windows(x);
  ASSERT_EQ(xs.size(), 20u);
  double err = 0.0, ref = 0.0;
  for (int i = 0; i < 20; ++i) {
    err += (xs[i].samples - windows[250 + i].samples).squaredNorm();
    ref += windows[250 + i].samples.squaredNorm();
  }
  EXPECT_GT(10 * std::log10(ref / err), 10.0);

  r = run_cli("evaluate --bundle " + b + " --windows " + w + " --offset 250 --report " + rep, dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string report = slurp(rep);
  EXPECT_EQ(report.rfind("method,cr,m,empirical_delta,mean_rsnr_db,median_rsnr_db,wall_time_s,seed\nsmt_odl,4,32,", 0),
            0u)
      << report;
}
