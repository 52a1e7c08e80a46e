#pragma once

// Small shared fixtures. Everything is built lazily once per process so the
// suites stay fast on 16x16 grids.

#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Core>

#include "hjbpod/closed_loop.hpp"
#include "hjbpod/deim.hpp"
#include "hjbpod/snapshots.hpp"

namespace testing {

struct SmallCavity {
  hjbpod::CavityGrid grid;
  hjbpod::FlowParameters params;
  hjbpod::Trajectory spinup;  // uncontrolled, t in [0, 2], dt = 0.01
  hjbpod::SnapshotSet snapshots;
  hjbpod::PodBasis basis;
  Eigen::MatrixXd velocities;  // snapshot columns (not mean-subtracted)
  hjbpod::DeimOperator deim;
  hjbpod::StaggeredState steady;  // Navier-Stokes steady state
};

inline const SmallCavity& small_cavity() {
  static const SmallCavity c = [] {
    SmallCavity s;
    s.grid = hjbpod::build_grid(16, 16);
    s.params.upwind_blend = hjbpod::default_upwind_blend(s.grid, 0.01, 1.0);
    const hjbpod::CavityFlow flow(s.grid, s.params);
    s.spinup = hjbpod::simulate(flow, flow.zero_state(), hjbpod::zero_control(0), 2.0, 0.01);
    s.snapshots = hjbpod::collect(s.grid, s.spinup, hjbpod::uniform_snapshot_times(2.0, 20));
    s.basis = hjbpod::compute_pod(s.snapshots, 3);
    s.velocities.resize(s.grid.num_velocity(), s.snapshots.size());
    for (int j = 0; j < s.snapshots.size(); ++j) s.velocities.col(j) = s.snapshots.snapshot(j);
    s.deim = hjbpod::build_deim(hjbpod::nonlinearity_snapshots(flow, s.velocities), 6, s.basis.modes);
    s.steady = hjbpod::steady_state(s.grid, s.params, hjbpod::FlowKind::NavierStokes);
    return s;
  }();
  return c;
}

inline Eigen::MatrixXd shape_matrix(const Eigen::VectorXd& b) {
  Eigen::MatrixXd m(b.size(), 1);
  m.col(0) = b;
  return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, unsigned seed) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) m.col(j) = random_vector(r, seed + static_cast<unsigned>(j) * 7919u);
  return m;
}

// Fresh scratch directory under the system temp dir.
inline std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("hjbpod_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace testing
