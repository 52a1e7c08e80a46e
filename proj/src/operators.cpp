#include "hjbpod/operators.hpp"

#include <vector>

#include "hjbpod/error.hpp"

namespace hjbpod {

namespace {

using Triplet = Eigen::Triplet<double>;

void add_laplacian_rows(const CavityGrid& g, std::vector<Triplet>& t) {
  const double ax = 1.0 / (g.hx * g.hx);
  const double ay = 1.0 / (g.hy * g.hy);
  // u rows: neighbours at i = 0 and i = nx are wall faces (known data),
  // rows below j = 0 and above j = ny-1 are ghosts reflected about the wall.
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i) {
      const int r = g.u_index(i, j);
      double diag = 2.0 * ax + 2.0 * ay;
      if (i > 1) t.emplace_back(r, g.u_index(i - 1, j), -ax);
      if (i < g.nx - 1) t.emplace_back(r, g.u_index(i + 1, j), -ax);
      if (j > 0) t.emplace_back(r, g.u_index(i, j - 1), -ay);
      else diag += ay;
      if (j < g.ny - 1) t.emplace_back(r, g.u_index(i, j + 1), -ay);
      else diag += ay;
      t.emplace_back(r, r, diag);
    }
  }
  for (int j = 1; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int r = g.v_index(i, j);
      double diag = 2.0 * ax + 2.0 * ay;
      if (j > 1) t.emplace_back(r, g.v_index(i, j - 1), -ay);
      if (j < g.ny - 1) t.emplace_back(r, g.v_index(i, j + 1), -ay);
      if (i > 0) t.emplace_back(r, g.v_index(i - 1, j), -ax);
      else diag += ax;
      if (i < g.nx - 1) t.emplace_back(r, g.v_index(i + 1, j), -ax);
      else diag += ax;
      t.emplace_back(r, r, diag);
    }
  }
}

}  // namespace

SemiDiscreteOperators assemble_operators(const CavityGrid& grid, const Eigen::MatrixXd& control) {
  const int nv = grid.num_velocity();
  if (control.size() > 0 && control.rows() != nv) {
    throw ConfigError("control shape has " + std::to_string(control.rows()) + " rows, grid has " +
                      std::to_string(nv) + " velocity unknowns");
  }
  SemiDiscreteOperators ops;
  ops.grid = grid;
  ops.control = control.size() > 0 ? control : Eigen::MatrixXd(nv, 0);

  std::vector<Triplet> t;
  t.reserve(5 * nv);
  add_laplacian_rows(grid, t);
  ops.laplacian.resize(nv, nv);
  ops.laplacian.setFromTriplets(t.begin(), t.end());

  t.clear();
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const int c = grid.cell_index(i, j);
      if (i + 1 < grid.nx) t.emplace_back(c, grid.u_index(i + 1, j), 1.0 / grid.hx);
      if (i > 0) t.emplace_back(c, grid.u_index(i, j), -1.0 / grid.hx);
      if (j + 1 < grid.ny) t.emplace_back(c, grid.v_index(i, j + 1), 1.0 / grid.hy);
      if (j > 0) t.emplace_back(c, grid.v_index(i, j), -1.0 / grid.hy);
    }
  }
  ops.divergence.resize(grid.num_cells(), nv);
  ops.divergence.setFromTriplets(t.begin(), t.end());
  ops.gradient = -SparseMatrix(ops.divergence.transpose());
  return ops;
}

Eigen::VectorXd laplacian_boundary(const CavityGrid& g, const WallVelocities& w) {
  const double ax = 1.0 / (g.hx * g.hx);
  const double ay = 1.0 / (g.hy * g.hy);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(g.num_velocity());
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i) {
      double& r = b[g.u_index(i, j)];
      if (i == 1) r += w.u_west * ax;
      if (i == g.nx - 1) r += w.u_east * ax;
      if (j == 0) r += 2.0 * w.u_south * ay;
      if (j == g.ny - 1) r += 2.0 * w.u_north * ay;
    }
  }
  for (int j = 1; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      double& r = b[g.v_index(i, j)];
      if (j == 1) r += w.v_south * ay;
      if (j == g.ny - 1) r += w.v_north * ay;
      if (i == 0) r += 2.0 * w.v_west * ax;
      if (i == g.nx - 1) r += 2.0 * w.v_east * ax;
    }
  }
  return b;
}

Eigen::VectorXd divergence_of(const SemiDiscreteOperators& ops, const Eigen::VectorXd& velocity) {
  return ops.divergence * velocity;
}

}  // namespace hjbpod
