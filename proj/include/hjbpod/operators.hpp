#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "hjbpod/grid.hpp"

namespace hjbpod {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Linear parts of the semi-discrete system
//   y' + nu*A*y + C*p = eta(y) + B*u + nu*g,   D*y = 0,
// where g carries the Dirichlet wall data of the Laplacian.
struct SemiDiscreteOperators {
  CavityGrid grid;
  SparseMatrix laplacian;   // A = -Delta_h with homogeneous Dirichlet data (SPD)
  SparseMatrix gradient;    // C: cells -> velocity unknowns
  SparseMatrix divergence;  // D: velocity unknowns -> cells
  Eigen::MatrixXd control;  // B: one column per shape function
};

// 5-point Laplacian, central gradient and divergence on the staggered layout.
// Walls have zero normal velocity, so D carries no boundary terms and D = -C^T.
SemiDiscreteOperators assemble_operators(const CavityGrid& grid,
                                         const Eigen::MatrixXd& control = {});

// Boundary vector g with Delta_h y = -A*y + g for the given wall data.
Eigen::VectorXd laplacian_boundary(const CavityGrid& grid, const WallVelocities& walls);

// D*y, one entry per cell.
Eigen::VectorXd divergence_of(const SemiDiscreteOperators& ops, const Eigen::VectorXd& velocity);

}  // namespace hjbpod
