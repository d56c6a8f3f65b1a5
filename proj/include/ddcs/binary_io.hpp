#ifndef DDCS_BINARY_IO_HPP
#define DDCS_BINARY_IO_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace ddcs {

/// Appends little-endian fields to a byte string.
class ByteWriter {
 public:
  void magic(std::string_view tag) { out_.append(tag); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  /// rows u32 | cols u32 | rows*cols f64, row-major.
  void matrix(const Eigen::MatrixXd& m);

  const std::string& bytes() const { return out_; }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

/// Reads little-endian fields; throws FormatError("truncated payload") when
/// the buffer runs out.
class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : in_(bytes) {}

  bool has_magic(std::string_view tag);
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  Eigen::MatrixXd matrix();
  /// Reads rows*cols doubles laid out row-major.
  Eigen::MatrixXd raw_rows(std::uint64_t rows, std::uint64_t cols);

  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t count) const;

  std::string_view in_;
  std::size_t pos_ = 0;
};

std::string read_file_bytes(const std::filesystem::path& path);

/// Writes through a temporary sibling file and renames it over `path`, so
/// readers never observe a partial file. The temporary is removed on any
/// failure.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view bytes);

namespace testing {
/// Called with the temporary path right before the final rename. Tests use
/// it to inject failures at the rename boundary; pass nullptr to clear.
void set_before_rename_hook(std::function<void(const std::filesystem::path&)> hook);
}  // namespace testing

}  // namespace ddcs

#endif  // DDCS_BINARY_IO_HPP
