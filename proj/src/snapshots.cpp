#include "hjbpod/snapshots.hpp"

#include <cmath>
#include <sstream>

#include "hjbpod/error.hpp"
#include "hjbpod/text_io.hpp"

namespace hjbpod {

SnapshotSet collect(const CavityGrid& grid, const Eigen::MatrixXd& velocities, std::vector<double> times) {
  if (velocities.cols() < 2) throw ConfigError("need at least two snapshots");
  if (velocities.rows() != grid.num_velocity()) throw ConfigError("snapshot length does not match the grid");
  if (static_cast<Eigen::Index>(times.size()) != velocities.cols()) {
    throw ConfigError("snapshot count and time count differ");
  }
  SnapshotSet set;
  set.grid = grid;
  set.times = std::move(times);
  set.mean = velocities.rowwise().mean();
  set.fluctuations = velocities.colwise() - set.mean;
  return set;
}

SnapshotSet collect(const CavityGrid& grid, const Trajectory& trajectory, const std::vector<double>& times) {
  Eigen::MatrixXd cols(grid.num_velocity(), static_cast<Eigen::Index>(times.size()));
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double t = times[j];
    const StaggeredState* hit = nullptr;
    for (const auto& s : trajectory.states) {
      if (std::abs(s.t - t) <= 1e-9 * std::max(1.0, std::abs(t))) {
        hit = &s;
        break;
      }
    }
    if (hit == nullptr) {
      std::ostringstream msg;
      msg << "no trajectory state at requested snapshot time " << t;
      throw ConfigError(msg.str());
    }
    if (hit->velocity.size() != grid.num_velocity()) throw ConfigError("trajectory state does not match the grid");
    cols.col(static_cast<Eigen::Index>(j)) = hit->velocity;
  }
  return collect(grid, cols, times);
}

std::vector<double> uniform_snapshot_times(double horizon, int count) {
  if (count < 1 || !(horizon > 0.0)) throw ConfigError("snapshot schedule needs a positive horizon and count");
  std::vector<double> t(count);
  for (int j = 0; j < count; ++j) t[j] = horizon * (j + 1) / count;
  return t;
}

std::string snapshots_to_text(const SnapshotSet& set) {
  std::ostringstream out;
  out << "HJBPOD-SNAPS v1 " << set.grid.nx << ' ' << set.grid.ny << ' ' << set.size() << '\n';
  io::write_vector(out, Eigen::Map<const Eigen::VectorXd>(set.times.data(), set.size()), 10);
  io::write_vector(out, set.mean);
  for (int j = 0; j < set.size(); ++j) io::write_vector(out, set.fluctuations.col(j));
  return out.str();
}

SnapshotSet snapshots_from_text(const std::string& text, const std::string& source) {
  io::TokenReader in(text, source);
  in.expect_header("HJBPOD-SNAPS");
  SnapshotSet set;
  const long nx = in.integer();
  const long ny = in.integer();
  const long n = in.integer();
  if (nx < 4 || ny < 4 || n < 0) throw FormatError(source + ": invalid snapshot header dimensions");
  set.grid = build_grid(static_cast<int>(nx), static_cast<int>(ny));
  const Eigen::VectorXd times = in.vector(n);
  set.times.assign(times.begin(), times.end());
  set.mean = in.vector(set.grid.num_velocity());
  set.fluctuations.resize(set.grid.num_velocity(), n);
  for (long j = 0; j < n; ++j) set.fluctuations.col(j) = in.vector(set.grid.num_velocity());
  if (!in.at_end()) throw FormatError(source + ": trailing data after snapshots");
  return set;
}

void save_snapshots(const std::string& path, const SnapshotSet& set) { io::write_file(path, snapshots_to_text(set)); }

SnapshotSet load_snapshots(const std::string& path) { return snapshots_from_text(io::read_file(path), path); }

}  // namespace hjbpod
