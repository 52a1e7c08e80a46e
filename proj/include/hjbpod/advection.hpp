#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "hjbpod/grid.hpp"

namespace hjbpod {

// Conservative advection div(y (x) y) on the MAC grid, central fluxes blended
// with donor-cell upwinding by `blend` in [0, 1]. The kernel evaluates a
// single velocity unknown and reads the field only through `value`, so the
// same code serves full evaluation, stencil discovery and sampled (DEIM)
// evaluation. The result is homogeneous of degree two in (field, walls).
template <class ValueFn>
double advection_at(const CavityGrid& g, const WallVelocities& w, double blend, int unknown,
                    ValueFn&& value) {
  const int nx = g.nx;
  const int ny = g.ny;
  auto u = [&](int i, int j) -> double {
    if (i == 0) return w.u_west;
    if (i == nx) return w.u_east;
    if (j == -1) return 2.0 * w.u_south - value(g.u_index(i, 0));
    if (j == ny) return 2.0 * w.u_north - value(g.u_index(i, ny - 1));
    return value(g.u_index(i, j));
  };
  auto v = [&](int i, int j) -> double {
    if (j == 0) return w.v_south;
    if (j == ny) return w.v_north;
    if (i == -1) return 2.0 * w.v_west - value(g.v_index(0, j));
    if (i == nx) return 2.0 * w.v_east - value(g.v_index(nx - 1, j));
    return value(g.v_index(i, j));
  };
  // Flux of (u v) through corner (i, j); the upwind part acts on the
  // transported component along the transporting one.
  auto corner_uv_y = [&](int i, int j) {
    const double ua = 0.5 * (u(i, j - 1) + u(i, j));
    const double ud = 0.5 * (u(i, j) - u(i, j - 1));
    const double va = 0.5 * (v(i - 1, j) + v(i, j));
    return ua * va - blend * std::abs(va) * ud;
  };
  auto corner_uv_x = [&](int i, int j) {
    const double ua = 0.5 * (u(i, j - 1) + u(i, j));
    const double va = 0.5 * (v(i - 1, j) + v(i, j));
    const double vd = 0.5 * (v(i, j) - v(i - 1, j));
    return ua * va - blend * std::abs(ua) * vd;
  };

  const Eigen::Vector2i f = g.face_of(unknown);
  const int i = f.x();
  const int j = f.y();
  if (g.is_u(unknown)) {
    // u^2 flux at the cell centers left and right of the face.
    auto center = [&](int ic) {
      const double ua = 0.5 * (u(ic, j) + u(ic + 1, j));
      const double ud = 0.5 * (u(ic + 1, j) - u(ic, j));
      return ua * ua - blend * std::abs(ua) * ud;
    };
    const double du2dx = (center(i) - center(i - 1)) / g.hx;
    const double duvdy = (corner_uv_y(i, j + 1) - corner_uv_y(i, j)) / g.hy;
    return du2dx + duvdy;
  }
  auto center = [&](int jc) {
    const double va = 0.5 * (v(i, jc) + v(i, jc + 1));
    const double vd = 0.5 * (v(i, jc + 1) - v(i, jc));
    return va * va - blend * std::abs(va) * vd;
  };
  const double duvdx = (corner_uv_x(i + 1, j) - corner_uv_x(i, j)) / g.hx;
  const double dv2dy = (center(j) - center(j - 1)) / g.hy;
  return duvdx + dv2dy;
}

// Nonlinear term eta(y) = -div(y (x) y) at every velocity unknown.
Eigen::VectorXd nonlinearity(const CavityGrid& g, const WallVelocities& w, double blend,
                             const Eigen::VectorXd& velocity);

// Velocity unknowns read when evaluating the kernel at `unknown` (at most 12),
// sorted ascending.
std::vector<int> advection_stencil(const CavityGrid& g, const WallVelocities& w, double blend,
                                   int unknown);

}  // namespace hjbpod
