#include "ddcs/binary_io.hpp"

#include <bit>
#include <fstream>
#include <sstream>
#include <system_error>

#include "ddcs/error.hpp"

namespace ddcs {

namespace {

std::function<void(const std::filesystem::path&)>& rename_hook() {
  static std::function<void(const std::filesystem::path&)> hook;
  return hook;
}

}  // namespace

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::matrix(const Eigen::MatrixXd& m) {
  u32(static_cast<std::uint32_t>(m.rows()));
  u32(static_cast<std::uint32_t>(m.cols()));
  out_.reserve(out_.size() + 8 * m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
}

void ByteReader::need(std::size_t count) const {
  if (in_.size() - pos_ < count) throw FormatError("truncated payload");
}

bool ByteReader::has_magic(std::string_view tag) {
  if (in_.size() - pos_ < tag.size() || in_.substr(pos_, tag.size()) != tag)
    return false;
  pos_ += tag.size();
  return true;
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
  pos_ += 8;
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

Eigen::MatrixXd ByteReader::matrix() {
  const std::uint32_t rows = u32();
  const std::uint32_t cols = u32();
  return raw_rows(rows, cols);
}

Eigen::MatrixXd ByteReader::raw_rows(std::uint64_t rows, std::uint64_t cols) {
  if (cols != 0 && rows > remaining() / 8 / cols) throw FormatError("truncated payload");
  need(static_cast<std::size_t>(rows * cols * 8));
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = f64();
  return m;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return std::move(buf).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write " + path.string());
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      out.flush();
      if (!out) throw IoError("write failed: " + path.string());
    }
    if (rename_hook()) rename_hook()(tmp);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot write " + path.string() + ": " + ec.message());
  } catch (...) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw;
  }
}

namespace testing {
void set_before_rename_hook(std::function<void(const std::filesystem::path&)> hook) {
  rename_hook() = std::move(hook);
}
}  // namespace testing

}  // namespace ddcs
