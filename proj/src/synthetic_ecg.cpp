#include "ddcs/synthetic_ecg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "ddcs/error.hpp"
#include "ddcs/random.hpp"

namespace ddcs {

namespace {

struct Wave {
  double amplitude;  // mV
  double center;     // s relative to the R peak
  double width;      // s, Gaussian sigma
};

using Beat = std::array<Wave, 5>;

Beat normal_beat(double rr) {
  const double qt = std::sqrt(rr);  // Bazett-style stretch of the T wave
  return {{{0.13, -0.20, 0.025},
           {-0.11, -0.035, 0.010},
           {1.15, 0.0, 0.012},
           {-0.24, 0.035, 0.012},
           {0.32, 0.27 * qt, 0.055}}};
}

Beat ectopic_beat(double rr) {
  const double qt = std::sqrt(rr);
  return {{{0.0, -0.20, 0.025},
           {-0.15, -0.05, 0.02},
           {0.85, 0.0, 0.035},
           {-0.55, 0.075, 0.04},
           {-0.35, 0.32 * qt, 0.07}}};
}

}  // namespace

RawRecording synthesize_ecg(const SyntheticEcgConfig& cfg) {
  if (!(cfg.sampling_rate > 0.0) || !(cfg.duration_s > 0.0) || !(cfg.heart_rate_bpm > 0.0))
    throw Error("synthetic ecg needs positive rate, duration and heart rate");
  const auto count = static_cast<Eigen::Index>(std::llround(cfg.duration_s * cfg.sampling_rate));
  const double fs = cfg.sampling_rate;
  RandomStream rng(cfg.seed);

  RawRecording rec;
  rec.sampling_rate = fs;
  rec.samples = Eigen::VectorXd::Zero(count);

  const double mean_rr = 60.0 / cfg.heart_rate_bpm;
  const double two_pi = 2.0 * std::numbers::pi;
  double t = 0.3 + 0.5 * rng.uniform() * mean_rr;
  bool compensate = false;
  while (t < cfg.duration_s + 1.0) {
    double rr = mean_rr * (1.0 + 0.05 * std::sin(two_pi * 0.25 * t) + 0.03 * std::sin(two_pi * 0.1 * t)) +
                cfg.rr_jitter_s * rng.normal();
    rr = std::max(rr, 0.4);
    const bool ectopic = !compensate && rng.uniform() < cfg.ectopic_rate;
    // An ectopic beat comes early and is followed by a compensatory pause.
    if (ectopic) t -= 0.25 * mean_rr;
    const double scale = (1.0 + 0.05 * rng.normal()) * (1.0 + 0.06 * std::sin(two_pi * 0.25 * t + 1.0));
    Beat beat = ectopic ? ectopic_beat(rr) : normal_beat(rr);
    for (auto& w : beat) {
      w.amplitude *= scale * (1.0 + 0.04 * rng.normal());
      w.width *= 1.0 + 0.04 * rng.normal();
      w.center += 0.003 * rng.normal();
    }
    for (const auto& w : beat) {
      if (w.amplitude == 0.0) continue;
      const double c = t + w.center;
      const auto lo = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor((c - 5 * w.width) * fs)));
      const auto hi = std::min<Eigen::Index>(count - 1, static_cast<Eigen::Index>(std::ceil((c + 5 * w.width) * fs)));
      for (Eigen::Index i = lo; i <= hi; ++i) {
        const double d = i / fs - c;
        rec.samples[i] += w.amplitude * std::exp(-0.5 * d * d / (w.width * w.width));
      }
    }
    compensate = ectopic;
    t += ectopic ? 1.25 * rr : rr;
  }

  const double phase1 = two_pi * rng.uniform();
  const double phase2 = two_pi * rng.uniform();
  const double phase3 = two_pi * rng.uniform();
  for (Eigen::Index i = 0; i < count; ++i) {
    const double s = i / fs;
    rec.samples[i] += cfg.baseline_amplitude *
                          (0.6 * std::sin(two_pi * 0.05 * s + phase1) +
                           0.4 * std::sin(two_pi * 0.3 * s + phase2)) +
                      cfg.mains_amplitude * std::sin(two_pi * 60.0 * s + phase3) +
                      cfg.noise_std * rng.normal();
  }
  return rec;
}

}  // namespace ddcs
