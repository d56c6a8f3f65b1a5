#include "ddcs/sparse_recovery.hpp"

#include <cmath>

#include "ddcs/binary_io.hpp"
#include "ddcs/error.hpp"
#include "ddcs/random.hpp"

namespace ddcs {

namespace {

constexpr std::string_view kMeasurementMagic = "DDCM";
constexpr std::uint32_t kMeasurementVersion = 1;

}  // namespace

MeasurementVector encode(const SensingMatrix& phi, const SignalWindow& x,
                         std::int64_t window_index) {
  if (x.samples.size() != phi.n())
    throw DimensionError("window length " + std::to_string(x.samples.size()) +
                         " does not match sensing matrix columns " + std::to_string(phi.n()));
  return {phi.matrix * x.samples, window_index};
}

void add_measurement_noise(MeasurementVector& y, double snr_db, std::uint64_t seed) {
  if (!std::isfinite(snr_db)) throw Error("noise snr must be finite");
  if (y.values.size() == 0) return;
  RandomStream rng(seed);
  const double sigma = y.values.norm() / std::sqrt(static_cast<double>(y.values.size())) *
                       std::pow(10.0, -snr_db / 20.0);
  for (Eigen::Index j = 0; j < y.values.size(); ++j) y.values[j] += sigma * rng.normal();
}

RecoveryResult recover_detailed(const MeasurementVector& y, const SensingMatrix& phi,
                                const Dictionary& psi, const RecoveryConfig& cfg) {
  if (phi.n() != psi.n()) throw DimensionError("phi and psi disagree on n");
  if (y.values.size() != phi.m())
    throw DimensionError("measurement length " + std::to_string(y.values.size()) +
                         " does not match sensing matrix rows " + std::to_string(phi.m()));
  if (!y.values.allFinite() || !phi.matrix.allFinite() || !psi.atoms.allFinite())
    throw NumericError("non-finite input");
  if (cfg.max_iter < 1 || !(cfg.tol > 0.0)) throw Error("recovery tolerances must be positive");

  const Eigen::MatrixXd op = phi.matrix * psi.atoms;
  if (op.cwiseAbs().maxCoeff() == 0.0) throw NumericError("operator is all-zero");

  RecoveryResult out;
  out.lambda = cfg.lambda_rec ? *cfg.lambda_rec
                              : kAutoLambdaScale * (op.transpose() * y.values).lpNorm<Eigen::Infinity>();
  LassoOptions opts;
  opts.max_iter = cfg.max_iter;
  opts.tol = cfg.tol;
  opts.record_history = true;
  const double lip = spectral_norm_sq(op, 1e-4) * (1.0 + 1e-3);
  out.solver = solve_lasso(op, y.values, out.lambda, opts, lip);
  out.theta.coeffs = out.solver.theta;
  out.residual_norm = (y.values - op * out.theta.coeffs).norm();
  return out;
}

SparseCode recover(const MeasurementVector& y, const SensingMatrix& phi,
                   const Dictionary& psi, const RecoveryConfig& cfg) {
  return recover_detailed(y, phi, psi, cfg).theta;
}

SignalWindow reconstruct(const Dictionary& psi, const SparseCode& theta,
                         std::int64_t source_offset) {
  if (theta.coeffs.size() != psi.k())
    throw DimensionError("code length " + std::to_string(theta.coeffs.size()) +
                         " does not match dictionary atoms " + std::to_string(psi.k()));
  return {psi.atoms * theta.coeffs, source_offset};
}

std::string serialize_measurements(const std::vector<MeasurementVector>& ys) {
  const Eigen::Index m = ys.empty() ? 0 : ys.front().values.size();
  ByteWriter w;
  w.magic(kMeasurementMagic);
  w.u32(kMeasurementVersion);
  w.u32(static_cast<std::uint32_t>(m));
  w.u32(static_cast<std::uint32_t>(ys.size()));
  for (const auto& y : ys) {
    if (y.values.size() != m) throw DimensionError("measurements differ in length");
    for (Eigen::Index i = 0; i < m; ++i) w.f64(y.values[i]);
  }
  return w.take();
}

std::vector<MeasurementVector> parse_measurements(std::string_view bytes) {
  ByteReader r(bytes);
  if (!r.has_magic(kMeasurementMagic)) throw FormatError("not a DDCM file");
  const std::uint32_t version = r.u32();
  if (version != kMeasurementVersion)
    throw FormatError("unsupported format version " + std::to_string(version));
  const std::uint32_t m = r.u32();
  const std::uint32_t count = r.u32();
  const Eigen::MatrixXd rows = r.raw_rows(count, m);
  if (r.remaining() != 0) throw FormatError("trailing bytes after payload");
  if (!rows.allFinite()) throw FormatError("non-finite entries");
  std::vector<MeasurementVector> out(count);
  for (std::uint32_t i = 0; i < count; ++i) out[i] = {rows.row(i).transpose(), i};
  return out;
}

void save_measurements(const std::vector<MeasurementVector>& ys,
                       const std::filesystem::path& path) {
  write_file_atomic(path, serialize_measurements(ys));
}

std::vector<MeasurementVector> load_measurements(const std::filesystem::path& path) {
  return parse_measurements(read_file_bytes(path));
}

}  // namespace ddcs
