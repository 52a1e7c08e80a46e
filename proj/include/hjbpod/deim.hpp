#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "hjbpod/grid.hpp"
#include "hjbpod/navier_stokes.hpp"

namespace hjbpod {

namespace io {
class TokenReader;
}

// Columns eta(y_j) for the given velocity columns.
Eigen::MatrixXd nonlinearity_snapshots(const CavityFlow& flow, const Eigen::MatrixXd& velocities);

// Greedy DEIM row selection. Argmax ties go to the lowest row. Throws
// NumericalError naming k if the k-th column is interpolated exactly by the
// previous ones (singular P^T U).
std::vector<int> select_indices(const Eigen::MatrixXd& basis);

// U (P^T U)^{-1} P^T g
Eigen::VectorXd deim_interpolate(const Eigen::MatrixXd& basis, const std::vector<int>& indices,
                                 const Eigen::VectorXd& full);

struct DeimOperator {
  Eigen::MatrixXd basis;       // U_nl; empty when loaded from file
  std::vector<int> indices;    // p_1 .. p_m
  Eigen::MatrixXd projection;  // Psi^T U_nl (P^T U_nl)^{-1}, l x m
  double condition = 0.0;      // 2-norm condition number of P^T U_nl

  int size() const { return static_cast<int>(indices.size()); }
};

// Basis from the m leading left singular vectors of the nonlinearity snapshots.
DeimOperator build_deim(const Eigen::MatrixXd& nonlinearity_columns, int m, const Eigen::MatrixXd& pod_modes);

// projection * samples, where samples[i] = eta at indices[i].
Eigen::VectorXd apply_deim(const DeimOperator& op, const Eigen::VectorXd& samples);

// eta at the DEIM rows for y = ybar + Psi w, evaluated from the local
// advection stencils only (O(m l) work per call).
class SampledNonlinearity {
 public:
  struct Point {
    int unknown = 0;
    std::vector<int> stencil;  // global velocity unknowns read by the kernel
    Eigen::VectorXd mean;      // ybar on the stencil
    Eigen::MatrixXd modes;     // Psi rows on the stencil
  };

  SampledNonlinearity() = default;
  SampledNonlinearity(const CavityGrid& grid, const WallVelocities& walls, double blend,
                      const std::vector<int>& indices, const Eigen::VectorXd& mean, const Eigen::MatrixXd& modes);
  SampledNonlinearity(const CavityGrid& grid, const WallVelocities& walls, double blend, std::vector<Point> points);

  Eigen::VectorXd evaluate(const Eigen::VectorXd& coefficients) const;

  const CavityGrid& grid() const { return grid_; }
  const WallVelocities& walls() const { return walls_; }
  double blend() const { return blend_; }
  const std::vector<Point>& points() const { return points_; }

 private:
  CavityGrid grid_;
  WallVelocities walls_;
  double blend_ = 0.0;
  std::vector<Point> points_;
};

// HJBPOD-DEIM v1 m, then the indices, then "l m" and the projection rows.
std::string deim_to_text(const DeimOperator& op);
DeimOperator read_deim(io::TokenReader& in);
DeimOperator deim_from_text(const std::string& text, const std::string& source = "<memory>");
void save_deim(const std::string& path, const DeimOperator& op);
DeimOperator load_deim(const std::string& path);

}  // namespace hjbpod
