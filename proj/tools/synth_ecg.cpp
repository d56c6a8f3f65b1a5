// Writes a synthetic single-lead ECG as a one-column csv (mV).
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ddcs/binary_io.hpp"
#include "ddcs/synthetic_ecg.hpp"

int main(int argc, char** argv) {
  ddcs::SyntheticEcgConfig cfg;
  std::string out;
  CLI::App app{"Synthetic ECG generator", "synth_ecg"};
  app.add_option("--duration", cfg.duration_s, "seconds")->capture_default_str();
  app.add_option("--fs", cfg.sampling_rate, "sampling rate (Hz)")->capture_default_str();
  app.add_option("--heart-rate", cfg.heart_rate_bpm, "beats per minute")->capture_default_str();
  app.add_option("--ectopic-rate", cfg.ectopic_rate, "share of ectopic beats")->capture_default_str();
  app.add_option("--noise", cfg.noise_std, "white noise sd (mV)")->capture_default_str();
  app.add_option("--seed", cfg.seed, "generator seed")->capture_default_str();
  app.add_option("--out", out, "csv to write")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto rec = ddcs::synthesize_ecg(cfg);
    std::string text = "sample\n";
    char line[64];
    for (Eigen::Index i = 0; i < rec.samples.size(); ++i) {
      std::snprintf(line, sizeof line, "%.6f\n", rec.samples[i]);
      text += line;
    }
    ddcs::write_file_atomic(out, text);
  } catch (const std::exception& e) {
    std::cerr << "error: synth_ecg: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
