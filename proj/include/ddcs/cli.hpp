#ifndef DDCS_CLI_HPP
#define DDCS_CLI_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ddcs/harness.hpp"

namespace ddcs::cli {

enum class CommandKind { ingest, train, compress, reconstruct, evaluate, sweep };

const char* to_string(CommandKind kind);

struct CliCommand {
  CommandKind kind = CommandKind::ingest;

  std::filesystem::path input;         // ingest --input
  SignalFormat format = SignalFormat::csv;
  double sampling_rate = 360.0;
  std::filesystem::path windows;       // --windows
  std::filesystem::path bundle;        // --bundle
  std::filesystem::path measurements;  // --measurements
  std::filesystem::path out;           // --out
  std::filesystem::path report;        // --report
  std::filesystem::path trace;         // train --trace
  std::filesystem::path config;        // --config

  double cr = 10.0;
  std::int64_t offset = 0;  // first window used by compress / evaluate
  std::int64_t count = 0;   // 0 means every remaining window

  ExperimentConfig experiment;
};

struct ParseOutcome {
  std::optional<CliCommand> command;  // empty when parsing stopped
  int exit_code = 0;                  // 0 for --help, 2 for usage errors
  std::string output;                 // help or usage text
};

ParseOutcome parse_args(const std::vector<std::string>& args);

/// Help for the program and every subcommand, as printed by --help.
std::string help_text();

/// Runs the command. 0 on success, 1 after printing
/// "error: <stage>: <detail>" to standard error.
int dispatch(const CliCommand& cmd);

/// parse_args followed by dispatch; what main returns.
int run(int argc, char** argv);

}  // namespace ddcs::cli

#endif  // DDCS_CLI_HPP
