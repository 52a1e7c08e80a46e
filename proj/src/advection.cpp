#include "hjbpod/advection.hpp"

#include <algorithm>

namespace hjbpod {

Eigen::VectorXd nonlinearity(const CavityGrid& g, const WallVelocities& w, double blend,
                             const Eigen::VectorXd& velocity) {
  Eigen::VectorXd eta(g.num_velocity());
  auto value = [&](int k) { return velocity[k]; };
  for (int k = 0; k < g.num_velocity(); ++k) eta[k] = -advection_at(g, w, blend, k, value);
  return eta;
}

std::vector<int> advection_stencil(const CavityGrid& g, const WallVelocities& w, double blend,
                                   int unknown) {
  std::vector<int> touched;
  auto record = [&](int k) {
    touched.push_back(k);
    return 0.0;
  };
  advection_at(g, w, blend, unknown, record);
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  return touched;
}

}  // namespace hjbpod
