#ifndef DDCS_SYNTHETIC_ECG_HPP
#define DDCS_SYNTHETIC_ECG_HPP

#include <cstdint>

#include "ddcs/ingest.hpp"

namespace ddcs {

/// Parameters of a single synthetic subject. Beats are sums of Gaussian
/// P/Q/R/S/T bumps with respiratory and random RR variability, a small share
/// of wide ectopic beats, slow baseline drift, mains pickup and white noise.
struct SyntheticEcgConfig {
  double sampling_rate = 360.0;
  double duration_s = 60.0;
  double heart_rate_bpm = 72.0;
  double rr_jitter_s = 0.03;
  double ectopic_rate = 0.03;
  double baseline_amplitude = 0.2;  // mV
  double mains_amplitude = 0.03;    // mV, 60 Hz
  double noise_std = 0.01;          // mV
  std::uint64_t seed = 7;
};

/// Amplitudes are in mV.
RawRecording synthesize_ecg(const SyntheticEcgConfig& cfg);

}  // namespace ddcs

#endif  // DDCS_SYNTHETIC_ECG_HPP
