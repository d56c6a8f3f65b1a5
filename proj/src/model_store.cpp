#include "ddcs/model_store.hpp"

#include <cmath>
#include <sstream>

#include "ddcs/binary_io.hpp"
#include "ddcs/error.hpp"

namespace ddcs {

namespace {

constexpr std::string_view kMagic = "DDCS";
constexpr double kAtomNormSlack = 1e-9;

std::string shape(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += "; ";
    out += item;
  }
  return out;
}

}  // namespace

std::vector<std::string> validate_bundle(const TrainedBundle& b) {
  std::vector<std::string> out;
  const auto& phi = b.phi.matrix;
  const auto& psi = b.psi.atoms;

  if (b.format_version != kBundleFormatVersion)
    out.push_back("unsupported format version " + std::to_string(b.format_version));
  if (b.m < 1) out.push_back("m must be >= 1");
  if (b.m >= b.n) out.push_back("m must be < n");
  if (b.n > b.k) out.push_back("k must be >= n");
  if (phi.rows() != static_cast<Eigen::Index>(b.m) ||
      phi.cols() != static_cast<Eigen::Index>(b.n))
    out.push_back("dimension mismatch: phi is " + shape(phi) + ", expected " +
                  std::to_string(b.m) + "x" + std::to_string(b.n));
  if (psi.rows() != static_cast<Eigen::Index>(b.n) ||
      psi.cols() != static_cast<Eigen::Index>(b.k))
    out.push_back("dimension mismatch: psi is " + shape(psi) + ", expected " +
                  std::to_string(b.n) + "x" + std::to_string(b.k));

  if (!phi.allFinite()) out.push_back("non-finite entry in phi");
  if (!psi.allFinite()) out.push_back("non-finite entry in psi");

  for (Eigen::Index i = 0; i < phi.rows(); ++i)
    if (phi.allFinite() && phi.row(i).cwiseAbs().maxCoeff() == 0.0)
      out.push_back("all-zero row in phi at index " + std::to_string(i));

  if (psi.allFinite()) {
    for (Eigen::Index j = 0; j < psi.cols(); ++j) {
      const double norm = psi.col(j).norm();
      if (norm == 0.0)
        out.push_back("zero-norm atom at index " + std::to_string(j));
      else if (norm > 1.0 + kAtomNormSlack)
        out.push_back("atom norm exceeds 1 at index " + std::to_string(j));
    }
  }

  if (!std::isfinite(b.achieved_delta) || b.achieved_delta < 0.0)
    out.push_back("achieved_delta must be finite and >= 0");
  return out;
}

std::string serialize_bundle(const TrainedBundle& bundle) {
  if (auto violations = validate_bundle(bundle); !violations.empty())
    throw FormatError("invalid bundle: " + join(violations));
  ByteWriter w;
  w.magic(kMagic);
  w.u32(bundle.format_version);
  w.u64(bundle.seed);
  w.u32(bundle.n);
  w.u32(bundle.m);
  w.u32(bundle.k);
  w.f64(bundle.achieved_delta);
  w.matrix(bundle.phi.matrix);
  w.matrix(bundle.psi.atoms);
  return w.take();
}

TrainedBundle parse_bundle(std::string_view bytes) {
  ByteReader r(bytes);
  if (!r.has_magic(kMagic)) throw FormatError("not a DDCS file");
  TrainedBundle b;
  b.format_version = r.u32();
  if (b.format_version != kBundleFormatVersion)
    throw FormatError("unsupported format version " + std::to_string(b.format_version));
  b.seed = r.u64();
  b.n = r.u32();
  b.m = r.u32();
  b.k = r.u32();
  b.achieved_delta = r.f64();
  b.phi.matrix = r.matrix();
  b.psi.atoms = r.matrix();
  if (r.remaining() != 0) throw FormatError("trailing bytes after payload");
  if (!b.phi.matrix.allFinite() || !b.psi.atoms.allFinite())
    throw FormatError("non-finite entries");
  if (auto violations = validate_bundle(b); !violations.empty())
    throw FormatError("invalid bundle: " + join(violations));
  return b;
}

void save_bundle(const TrainedBundle& bundle, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_bundle(bundle));
}

TrainedBundle load_bundle(const std::filesystem::path& path) {
  return parse_bundle(read_file_bytes(path));
}

}  // namespace ddcs
