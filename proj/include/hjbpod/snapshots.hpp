#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "hjbpod/grid.hpp"
#include "hjbpod/navier_stokes.hpp"

namespace hjbpod {

// Mean flow and mean-subtracted velocity snapshots Y = [y_1 - ybar, ..., y_n - ybar].
struct SnapshotSet {
  CavityGrid grid;
  std::vector<double> times;
  Eigen::VectorXd mean;
  Eigen::MatrixXd fluctuations;

  int size() const { return static_cast<int>(fluctuations.cols()); }
  Eigen::VectorXd snapshot(int j) const { return mean + fluctuations.col(j); }
};

// Velocity columns (one per time) -> snapshot set. Requires n >= 2.
SnapshotSet collect(const CavityGrid& grid, const Eigen::MatrixXd& velocities, std::vector<double> times);

// Picks the states of `trajectory` at the requested times (matched to 1e-9);
// pressure is dropped. A missing time is a ConfigError naming it.
SnapshotSet collect(const CavityGrid& grid, const Trajectory& trajectory, const std::vector<double>& times);

// The n equispaced times horizon*j/n, j = 1..n.
std::vector<double> uniform_snapshot_times(double horizon, int count);

// HJBPOD-SNAPS v1 nx ny n, then the n times, the mean field and the n columns.
std::string snapshots_to_text(const SnapshotSet& set);
SnapshotSet snapshots_from_text(const std::string& text, const std::string& source = "<memory>");
void save_snapshots(const std::string& path, const SnapshotSet& set);
SnapshotSet load_snapshots(const std::string& path);

}  // namespace hjbpod
