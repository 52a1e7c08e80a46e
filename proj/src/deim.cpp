#include "hjbpod/deim.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "hjbpod/advection.hpp"
#include "hjbpod/error.hpp"
#include "hjbpod/pod.hpp"
#include "hjbpod/text_io.hpp"

namespace hjbpod {

namespace {

Eigen::MatrixXd sample_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows, Eigen::Index cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]).head(cols);
  return out;
}

Eigen::Index argmax_abs(const Eigen::VectorXd& v) {
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index r = 0; r < v.size(); ++r) {
    if (std::abs(v[r]) > best) {
      best = std::abs(v[r]);
      arg = r;
    }
  }
  return arg;
}

}  // namespace

Eigen::MatrixXd nonlinearity_snapshots(const CavityFlow& flow, const Eigen::MatrixXd& velocities) {
  if (velocities.rows() != flow.grid().num_velocity()) throw ConfigError("snapshot length does not match the grid");
  Eigen::MatrixXd out(velocities.rows(), velocities.cols());
  for (Eigen::Index j = 0; j < velocities.cols(); ++j) out.col(j) = flow.nonlinearity(velocities.col(j));
  return out;
}

std::vector<int> select_indices(const Eigen::MatrixXd& basis) {
  if (basis.cols() < 1 || basis.cols() > basis.rows()) throw ConfigError("DEIM basis must have 1..rows columns");
  std::vector<int> idx;
  idx.push_back(static_cast<int>(argmax_abs(basis.col(0))));
  const double scale = basis.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 1; k < basis.cols(); ++k) {
    const Eigen::MatrixXd pu = sample_rows(basis, idx, k);
    Eigen::VectorXd rhs(k);
    for (Eigen::Index i = 0; i < k; ++i) rhs[i] = basis(idx[i], k);
    const Eigen::VectorXd c = pu.partialPivLu().solve(rhs);
    const Eigen::VectorXd residual = basis.col(k) - basis.leftCols(k) * c;
    const Eigen::Index p = argmax_abs(residual);
    if (!(std::abs(residual[p]) > 1e-13 * scale)) {
      throw NumericalError("DEIM selection: P^T U singular at column " + std::to_string(k + 1));
    }
    idx.push_back(static_cast<int>(p));
  }
  return idx;
}

Eigen::VectorXd deim_interpolate(const Eigen::MatrixXd& basis, const std::vector<int>& indices,
                                 const Eigen::VectorXd& full) {
  const Eigen::MatrixXd pu = sample_rows(basis, indices, basis.cols());
  Eigen::VectorXd samples(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) samples[static_cast<Eigen::Index>(i)] = full[indices[i]];
  return basis * pu.fullPivLu().solve(samples);
}

DeimOperator build_deim(const Eigen::MatrixXd& nonlinearity_columns, int m, const Eigen::MatrixXd& pod_modes) {
  if (pod_modes.rows() != nonlinearity_columns.rows()) throw ConfigError("POD modes and nonlinearity snapshots differ in length");
  DeimOperator op;
  op.basis = left_singular_basis(nonlinearity_columns, m).vectors;
  op.indices = select_indices(op.basis);
  const Eigen::MatrixXd pu = sample_rows(op.basis, op.indices, m);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(pu);
  if (!lu.isInvertible()) throw NumericalError("DEIM interpolation matrix P^T U is singular");
  const Eigen::JacobiSVD<Eigen::MatrixXd> sv(pu);
  op.condition = sv.singularValues()[0] / sv.singularValues()[m - 1];
  op.projection = (pod_modes.transpose() * op.basis) * lu.inverse();
  return op;
}

Eigen::VectorXd apply_deim(const DeimOperator& op, const Eigen::VectorXd& samples) {
  if (samples.size() != op.size()) {
    throw ConfigError("DEIM expects " + std::to_string(op.size()) + " samples, got " + std::to_string(samples.size()));
  }
  return op.projection * samples;
}

SampledNonlinearity::SampledNonlinearity(const CavityGrid& grid, const WallVelocities& walls, double blend,
                                         const std::vector<int>& indices, const Eigen::VectorXd& mean,
                                         const Eigen::MatrixXd& modes)
    : grid_(grid), walls_(walls), blend_(blend) {
  for (int k : indices) {
    Point p;
    p.unknown = k;
    p.stencil = advection_stencil(grid, walls, blend, k);
    const auto s = static_cast<Eigen::Index>(p.stencil.size());
    p.mean.resize(s);
    p.modes.resize(s, modes.cols());
    for (Eigen::Index i = 0; i < s; ++i) {
      p.mean[i] = mean[p.stencil[i]];
      p.modes.row(i) = modes.row(p.stencil[i]);
    }
    points_.push_back(std::move(p));
  }
}

SampledNonlinearity::SampledNonlinearity(const CavityGrid& grid, const WallVelocities& walls, double blend,
                                         std::vector<Point> points)
    : grid_(grid), walls_(walls), blend_(blend), points_(std::move(points)) {}

Eigen::VectorXd SampledNonlinearity::evaluate(const Eigen::VectorXd& coefficients) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(points_.size()));
  for (std::size_t n = 0; n < points_.size(); ++n) {
    const Point& p = points_[n];
    const Eigen::VectorXd local = p.mean + p.modes * coefficients;
    auto value = [&](int k) {
      for (std::size_t i = 0; i < p.stencil.size(); ++i) {
        if (p.stencil[i] == k) return local[static_cast<Eigen::Index>(i)];
      }
      throw std::logic_error("advection stencil lookup outside recorded stencil");
    };
    out[static_cast<Eigen::Index>(n)] = -advection_at(grid_, walls_, blend_, p.unknown, value);
  }
  return out;
}

std::string deim_to_text(const DeimOperator& op) {
  std::ostringstream out;
  out << "HJBPOD-DEIM v1 " << op.size() << '\n';
  for (int i = 0; i < op.size(); ++i) out << op.indices[i] << (i + 1 == op.size() ? '\n' : ' ');
  out << op.projection.rows() << ' ' << op.projection.cols() << '\n';
  io::write_matrix(out, op.projection);
  return out.str();
}

DeimOperator read_deim(io::TokenReader& in) {
  in.expect_header("HJBPOD-DEIM");
  const long m = in.integer();
  if (m < 1) throw FormatError(in.source() + ": DEIM size must be positive");
  DeimOperator op;
  for (long i = 0; i < m; ++i) op.indices.push_back(static_cast<int>(in.integer()));
  const long rows = in.integer();
  const long cols = in.integer();
  if (cols != m || rows < 1) throw FormatError(in.source() + ": DEIM projection has wrong shape");
  op.projection = in.matrix(rows, cols);
  return op;
}

DeimOperator deim_from_text(const std::string& text, const std::string& source) {
  io::TokenReader in(text, source);
  DeimOperator op = read_deim(in);
  if (!in.at_end()) throw FormatError(source + ": trailing data after DEIM block");
  return op;
}

void save_deim(const std::string& path, const DeimOperator& op) { io::write_file(path, deim_to_text(op)); }

DeimOperator load_deim(const std::string& path) { return deim_from_text(io::read_file(path), path); }

}  // namespace hjbpod
