#pragma once

#include <string>

#include <Eigen/Core>

#include "hjbpod/grid.hpp"
#include "hjbpod/snapshots.hpp"

namespace hjbpod {

// Thin SVD of a snapshot matrix, left vectors normalized so that the
// largest-magnitude entry of every column is positive (first one on ties).
struct LeftSingularBasis {
  Eigen::MatrixXd vectors;  // leading `count` left singular vectors
  Eigen::VectorXd values;   // all singular values, non-increasing
};

// Throws ConfigError if count exceeds the numerical rank, i.e. if
// sigma_count < 1e-12 * sigma_1.
LeftSingularBasis left_singular_basis(const Eigen::MatrixXd& data, int count);

// Rank-l POD basis in the Euclidean inner product, y ~ ybar + modes * w.
struct PodBasis {
  CavityGrid grid;
  Eigen::MatrixXd modes;            // psi_1 .. psi_l as columns
  Eigen::VectorXd singular_values;  // all singular values of Y
  Eigen::VectorXd mean;             // ybar

  int size() const { return static_cast<int>(modes.cols()); }
};

PodBasis compute_pod(const SnapshotSet& set, int rank);

void check_field_size(const PodBasis& basis, Eigen::Index n);
void check_coefficient_size(const PodBasis& basis, Eigen::Index n);

// w_i = psi_i^T (y - ybar)
template <class Derived>
Eigen::VectorXd project(const PodBasis& basis, const Eigen::MatrixBase<Derived>& field) {
  check_field_size(basis, field.size());
  return basis.modes.transpose() * (field - basis.mean);
}

// ybar + sum_i w_i psi_i
template <class Derived>
Eigen::VectorXd reconstruct(const PodBasis& basis, const Eigen::MatrixBase<Derived>& coefficients) {
  check_coefficient_size(basis, coefficients.size());
  return basis.mean + basis.modes * coefficients;
}


// HJBPOD-BASIS v1 nx ny l n, then the mean, the n singular values and the l modes.
std::string basis_to_text(const PodBasis& basis);
PodBasis basis_from_text(const std::string& text, const std::string& source = "<memory>");
void save_basis(const std::string& path, const PodBasis& basis);
PodBasis load_basis(const std::string& path);

}  // namespace hjbpod
