#ifndef DDCS_INGEST_HPP
#define DDCS_INGEST_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ddcs/model_store.hpp"

namespace ddcs {

struct RawRecording {
  Eigen::VectorXd samples;
  double sampling_rate = 360.0;  // Hz
};

struct PreprocessConfig {
  double baseline_window_1 = 0.2;  // seconds, first median stage
  double baseline_window_2 = 0.6;  // seconds, second median stage
  double lowpass_cutoff = 40.0;    // Hz
  int fir_order = 64;
  int window_length = 128;
  int stride = 128;
  int train_count = 3000;
  int test_count = 600;
};

enum class SignalFormat { csv, raw_i16le };

SignalFormat parse_signal_format(std::string_view name);

/// raw-i16le samples are divided by this gain.
inline constexpr double kRawSampleGain = 2048.0;

/// CSV: one decimal sample per line. A first line reading "sample" is taken as a
/// header and skipped. Blank lines are ignored.
RawRecording parse_csv_signal(std::string_view text, double sampling_rate);
RawRecording parse_raw_i16le(std::string_view bytes, double sampling_rate);
RawRecording read_signal(const std::filesystem::path& path, SignalFormat format,
                         double sampling_rate);

/// Median window length in samples for a duration, rounded to the nearest
/// integer and bumped to the next odd value.
int median_window_samples(double seconds, double sampling_rate);

/// Running median of odd width with reflection padding at both edges.
Eigen::VectorXd moving_median(const Eigen::VectorXd& x, int width);

/// x - median2(median1(x)).
RawRecording remove_baseline(const RawRecording& rec, const PreprocessConfig& cfg);

/// Hamming-windowed sinc, fir_order + 1 taps, normalized to unit DC gain.
Eigen::VectorXd lowpass_coefficients(double cutoff_hz, double sampling_rate,
                                     int fir_order);

/// Zero-phase application of the linear-phase FIR: the fir_order/2 group
/// delay is compensated and edges are reflection padded.
RawRecording lowpass_filter(const RawRecording& rec, const PreprocessConfig& cfg);

/// remove_baseline followed by lowpass_filter.
RawRecording preprocess(const RawRecording& rec, const PreprocessConfig& cfg);

std::vector<SignalWindow> window_signal(const RawRecording& rec,
                                        const PreprocessConfig& cfg);

struct TrainTestSplit {
  std::vector<SignalWindow> train;
  std::vector<SignalWindow> test;
};

/// First train_count windows train, the next test_count test. No shuffling.
TrainTestSplit split_train_test(const std::vector<SignalWindow>& windows,
                                const PreprocessConfig& cfg);

/// DDCW window file: "DDCW" | version u32 | n u32 | count u32 |
/// count*n f64 row-major, little-endian.
std::string serialize_windows(const std::vector<SignalWindow>& windows);
/// Offsets are not stored; window i is given source_offset i * n.
std::vector<SignalWindow> parse_windows(std::string_view bytes);
void save_windows(const std::vector<SignalWindow>& windows,
                  const std::filesystem::path& path);
std::vector<SignalWindow> load_windows(const std::filesystem::path& path);

}  // namespace ddcs

#endif  // DDCS_INGEST_HPP
