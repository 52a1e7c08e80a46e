#include "hjbpod/pod.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "hjbpod/error.hpp"
#include "hjbpod/text_io.hpp"

namespace hjbpod {

LeftSingularBasis left_singular_basis(const Eigen::MatrixXd& data, int count) {
  const Eigen::Index max_rank = std::min(data.rows(), data.cols());
  if (count < 1 || count > max_rank) {
    throw ConfigError("requested " + std::to_string(count) + " singular vectors of a " +
                      std::to_string(data.rows()) + "x" + std::to_string(data.cols()) + " matrix");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinU);
  LeftSingularBasis out;
  out.values = svd.singularValues();
  const double lead = out.values[0];
  const double tail = out.values[count - 1];
  if (!(lead > 0.0) || tail < 1e-12 * lead) {
    std::ostringstream msg;
    msg << "rank " << count << " exceeds the numerical rank: sigma_" << count << " = " << tail
        << ", sigma_1 = " << lead;
    throw ConfigError(msg.str());
  }
  out.vectors = svd.matrixU().leftCols(count);
  for (int i = 0; i < count; ++i) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < out.vectors.rows(); ++r) {
      const double a = std::abs(out.vectors(r, i));
      if (a > best) {
        best = a;
        arg = r;
      }
    }
    if (out.vectors(arg, i) < 0.0) out.vectors.col(i) *= -1.0;
  }
  return out;
}

PodBasis compute_pod(const SnapshotSet& set, int rank) {
  LeftSingularBasis svd = left_singular_basis(set.fluctuations, rank);
  return PodBasis{set.grid, std::move(svd.vectors), std::move(svd.values), set.mean};
}

void check_field_size(const PodBasis& basis, Eigen::Index n) {
  if (n != basis.mean.size()) {
    throw ConfigError("field of length " + std::to_string(n) + " does not match basis grid (" +
                      std::to_string(basis.mean.size()) + ")");
  }
}

void check_coefficient_size(const PodBasis& basis, Eigen::Index n) {
  if (n != basis.size()) {
    throw ConfigError("coefficient vector of length " + std::to_string(n) + " for a rank-" +
                      std::to_string(basis.size()) + " basis");
  }
}

std::string basis_to_text(const PodBasis& basis) {
  std::ostringstream out;
  out << "HJBPOD-BASIS v1 " << basis.grid.nx << ' ' << basis.grid.ny << ' ' << basis.size() << ' '
      << basis.singular_values.size() << '\n';
  io::write_vector(out, basis.mean);
  io::write_vector(out, basis.singular_values);
  for (int i = 0; i < basis.size(); ++i) io::write_vector(out, basis.modes.col(i));
  return out.str();
}

PodBasis basis_from_text(const std::string& text, const std::string& source) {
  io::TokenReader in(text, source);
  in.expect_header("HJBPOD-BASIS");
  const long nx = in.integer();
  const long ny = in.integer();
  const long rank = in.integer();
  const long n = in.integer();
  if (nx < 4 || ny < 4 || rank < 1 || n < rank) throw FormatError(source + ": invalid basis header dimensions");
  PodBasis b;
  b.grid = build_grid(static_cast<int>(nx), static_cast<int>(ny));
  b.mean = in.vector(b.grid.num_velocity());
  b.singular_values = in.vector(n);
  b.modes.resize(b.grid.num_velocity(), rank);
  for (long i = 0; i < rank; ++i) b.modes.col(i) = in.vector(b.grid.num_velocity());
  if (!in.at_end()) throw FormatError(source + ": trailing data after basis");
  return b;
}

void save_basis(const std::string& path, const PodBasis& basis) { io::write_file(path, basis_to_text(basis)); }

PodBasis load_basis(const std::string& path) { return basis_from_text(io::read_file(path), path); }

}  // namespace hjbpod
