#include "ddcs/ingest.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>

#include "ddcs/binary_io.hpp"
#include "ddcs/error.hpp"

namespace ddcs {

namespace {

constexpr std::string_view kWindowMagic = "DDCW";
constexpr std::uint32_t kWindowVersion = 1;

// Index into [0, size) mirrored at both ends without repeating the edge
// sample (… x2 x1 | x0 x1 … xN-1 | xN-2 …).
Eigen::Index reflect(Eigen::Index i, Eigen::Index size) {
  if (size == 1) return 0;
  const Eigen::Index period = 2 * (size - 1);
  i %= period;
  if (i < 0) i += period;
  return i < size ? i : period - i;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

// The only accepted header is a first line reading "sample".
bool is_header(std::string_view line) {
  constexpr std::string_view kHeader = "sample";
  if (line.size() != kHeader.size()) return false;
  for (std::size_t i = 0; i < line.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(line[i])) != kHeader[i]) return false;
  return true;
}

void check_rate(double fs) {
  if (!(fs > 0.0) || !std::isfinite(fs)) throw Error("sampling rate must be > 0");
}

}  // namespace

SignalFormat parse_signal_format(std::string_view name) {
  if (name == "csv") return SignalFormat::csv;
  if (name == "raw-i16le") return SignalFormat::raw_i16le;
  throw Error("unknown signal format '" + std::string(name) + "'");
}

RawRecording parse_csv_signal(std::string_view text, double sampling_rate) {
  check_rate(sampling_rate);
  std::vector<double> values;
  std::size_t line_no = 0;
  bool first_content = true;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (line.empty()) continue;
    double v = 0.0;
    if (!parse_double(line, v)) {
      if (!(first_content && is_header(line)))
        throw FormatError("unparseable sample at line " + std::to_string(line_no));
      first_content = false;
      continue;
    }
    first_content = false;
    values.push_back(v);
  }
  if (values.empty()) throw FormatError("empty recording");
  RawRecording rec;
  rec.samples = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  rec.sampling_rate = sampling_rate;
  return rec;
}

RawRecording parse_raw_i16le(std::string_view bytes, double sampling_rate) {
  check_rate(sampling_rate);
  if (bytes.empty()) throw FormatError("empty recording");
  if (bytes.size() % 2 != 0) throw FormatError("odd byte count for raw-i16le");
  RawRecording rec;
  rec.sampling_rate = sampling_rate;
  rec.samples.resize(static_cast<Eigen::Index>(bytes.size() / 2));
  for (Eigen::Index i = 0; i < rec.samples.size(); ++i) {
    const auto lo = static_cast<unsigned char>(bytes[2 * i]);
    const auto hi = static_cast<unsigned char>(bytes[2 * i + 1]);
    const auto raw = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
    rec.samples[i] = raw / kRawSampleGain;
  }
  return rec;
}

RawRecording read_signal(const std::filesystem::path& path, SignalFormat format,
                         double sampling_rate) {
  const std::string bytes = read_file_bytes(path);
  return format == SignalFormat::csv ? parse_csv_signal(bytes, sampling_rate)
                                     : parse_raw_i16le(bytes, sampling_rate);
}

int median_window_samples(double seconds, double sampling_rate) {
  long w = std::lround(seconds * sampling_rate);
  if (w % 2 == 0) ++w;
  return static_cast<int>(w);
}

Eigen::VectorXd moving_median(const Eigen::VectorXd& x, int width) {
  if (width < 1 || width % 2 == 0) throw Error("median width must be odd and >= 1");
  const Eigen::Index n = x.size();
  const Eigen::Index half = width / 2;
  Eigen::VectorXd out(n);
  if (n == 0) return out;

  auto padded = [&](Eigen::Index i) { return x[reflect(i - half, n)]; };
  std::multiset<double> window;
  for (Eigen::Index i = 0; i < width; ++i) window.insert(padded(i));
  auto mid = std::next(window.begin(), half);
  for (Eigen::Index i = 0;; ++i) {
    out[i] = *mid;
    if (i + 1 == n) break;
    const double incoming = padded(i + width);
    const double outgoing = padded(i);
    window.insert(incoming);
    if (incoming < *mid) --mid;
    if (outgoing <= *mid) ++mid;
    window.erase(window.lower_bound(outgoing));
  }
  return out;
}

RawRecording remove_baseline(const RawRecording& rec, const PreprocessConfig& cfg) {
  check_rate(rec.sampling_rate);
  const int w1 = median_window_samples(cfg.baseline_window_1, rec.sampling_rate);
  const int w2 = median_window_samples(cfg.baseline_window_2, rec.sampling_rate);
  if (w1 < 1 || w2 < 1) throw Error("median windows must be at least one sample");
  if (rec.samples.size() < std::max(w1, w2))
    throw Error("recording shorter than median window (" +
                std::to_string(rec.samples.size()) + " < " +
                std::to_string(std::max(w1, w2)) + " samples)");
  RawRecording out = rec;
  out.samples = rec.samples - moving_median(moving_median(rec.samples, w1), w2);
  return out;
}

Eigen::VectorXd lowpass_coefficients(double cutoff_hz, double sampling_rate,
                                     int fir_order) {
  check_rate(sampling_rate);
  if (fir_order < 2 || fir_order % 2 != 0) throw Error("fir order must be even and >= 2");
  if (!(cutoff_hz > 0.0) || cutoff_hz >= sampling_rate / 2.0)
    throw Error("cutoff must lie in (0, nyquist)");
  const double fc = cutoff_hz / sampling_rate;
  const int half = fir_order / 2;
  Eigen::VectorXd h(fir_order + 1);
  for (int i = 0; i <= fir_order; ++i) {
    const double t = i - half;
    const double sinc = t == 0 ? 2.0 * fc
                               : std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
    const double hamming = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / fir_order);
    h[i] = sinc * hamming;
  }
  return h / h.sum();
}

RawRecording lowpass_filter(const RawRecording& rec, const PreprocessConfig& cfg) {
  const Eigen::VectorXd h = lowpass_coefficients(cfg.lowpass_cutoff, rec.sampling_rate, cfg.fir_order);
  const Eigen::Index n = rec.samples.size();
  const Eigen::Index half = cfg.fir_order / 2;
  RawRecording out = rec;
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < h.size(); ++j)
      acc += h[j] * rec.samples[reflect(i + half - j, n)];
    out.samples[i] = acc;
  }
  return out;
}

RawRecording preprocess(const RawRecording& rec, const PreprocessConfig& cfg) {
  return lowpass_filter(remove_baseline(rec, cfg), cfg);
}

std::vector<SignalWindow> window_signal(const RawRecording& rec,
                                        const PreprocessConfig& cfg) {
  if (cfg.window_length < 2) throw Error("window length must be >= 2");
  if (cfg.stride < 1) throw Error("stride must be >= 1");
  std::vector<SignalWindow> out;
  const Eigen::Index len = rec.samples.size();
  for (Eigen::Index off = 0; off + cfg.window_length <= len; off += cfg.stride)
    out.push_back({rec.samples.segment(off, cfg.window_length), off});
  return out;
}

TrainTestSplit split_train_test(const std::vector<SignalWindow>& windows,
                                const PreprocessConfig& cfg) {
  if (cfg.train_count < 0 || cfg.test_count < 0) throw Error("counts must be >= 0");
  const auto need = static_cast<std::size_t>(cfg.train_count) + cfg.test_count;
  if (need > windows.size())
    throw Error("insufficient windows: need " + std::to_string(need) + ", have " +
                std::to_string(windows.size()));
  TrainTestSplit split;
  split.train.assign(windows.begin(), windows.begin() + cfg.train_count);
  split.test.assign(windows.begin() + cfg.train_count, windows.begin() + need);
  return split;
}

std::string serialize_windows(const std::vector<SignalWindow>& windows) {
  const Eigen::Index n = windows.empty() ? 0 : windows.front().samples.size();
  ByteWriter w;
  w.magic(kWindowMagic);
  w.u32(kWindowVersion);
  w.u32(static_cast<std::uint32_t>(n));
  w.u32(static_cast<std::uint32_t>(windows.size()));
  for (const auto& win : windows) {
    if (win.samples.size() != n) throw DimensionError("windows differ in length");
    for (Eigen::Index i = 0; i < n; ++i) w.f64(win.samples[i]);
  }
  return w.take();
}

std::vector<SignalWindow> parse_windows(std::string_view bytes) {
  ByteReader r(bytes);
  if (!r.has_magic(kWindowMagic)) throw FormatError("not a DDCW file");
  const std::uint32_t version = r.u32();
  if (version != kWindowVersion)
    throw FormatError("unsupported format version " + std::to_string(version));
  const std::uint32_t n = r.u32();
  const std::uint32_t count = r.u32();
  const Eigen::MatrixXd rows = r.raw_rows(count, n);
  if (r.remaining() != 0) throw FormatError("trailing bytes after payload");
  if (!rows.allFinite()) throw FormatError("non-finite entries");
  std::vector<SignalWindow> out(count);
  for (std::uint32_t i = 0; i < count; ++i)
    out[i] = {rows.row(i).transpose(), static_cast<std::int64_t>(i) * n};
  return out;
}

void save_windows(const std::vector<SignalWindow>& windows,
                  const std::filesystem::path& path) {
  write_file_atomic(path, serialize_windows(windows));
}

std::vector<SignalWindow> load_windows(const std::filesystem::path& path) {
  return parse_windows(read_file_bytes(path));
}

}  // namespace ddcs
