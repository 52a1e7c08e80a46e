#pragma once

#include <Eigen/Core>

namespace hjbpod {

// Uniform MAC grid on the unit square.
//
// u lives on vertical faces x = i*hx, i = 1..nx-1, y = (j+1/2)*hy, j = 0..ny-1.
// v lives on horizontal faces x = (i+1/2)*hx, i = 0..nx-1, y = j*hy, j = 1..ny-1.
// p lives at cell centers (i, j), i = 0..nx-1, j = 0..ny-1.
// A velocity vector stores all u unknowns followed by all v unknowns, each
// block row-major (j outer, i inner).
struct CavityGrid {
  int nx = 0;
  int ny = 0;
  double hx = 0.0;
  double hy = 0.0;

  int num_u() const { return (nx - 1) * ny; }
  int num_v() const { return nx * (ny - 1); }
  int num_velocity() const { return num_u() + num_v(); }
  int num_cells() const { return nx * ny; }
  double cell_area() const { return hx * hy; }

  int u_index(int i, int j) const { return j * (nx - 1) + (i - 1); }
  int v_index(int i, int j) const { return num_u() + (j - 1) * nx + i; }
  int cell_index(int i, int j) const { return j * nx + i; }

  bool is_u(int unknown) const { return unknown < num_u(); }

  // Inverse of u_index / v_index: face coordinates (i, j) of an unknown.
  Eigen::Vector2i face_of(int unknown) const {
    if (is_u(unknown)) return {unknown % (nx - 1) + 1, unknown / (nx - 1)};
    const int k = unknown - num_u();
    return {k % nx, k / nx + 1};
  }

  // Physical position of a velocity unknown.
  Eigen::Vector2d position_of(int unknown) const {
    const Eigen::Vector2i f = face_of(unknown);
    if (is_u(unknown)) return {f.x() * hx, (f.y() + 0.5) * hy};
    return {(f.x() + 0.5) * hx, f.y() * hy};
  }

  bool operator==(const CavityGrid& other) const { return nx == other.nx && ny == other.ny; }
};

// Throws ConfigError unless nx, ny >= 4.
CavityGrid build_grid(int nx, int ny);

// Constant velocities prescribed on the four walls. For u the west/east
// values are normal (face values), south/north tangential (imposed through
// ghost cells); for v the roles are swapped.
struct WallVelocities {
  double u_south = 0.0;
  double u_north = 0.0;
  double u_west = 0.0;
  double u_east = 0.0;
  double v_south = 0.0;
  double v_north = 0.0;
  double v_west = 0.0;
  double v_east = 0.0;

  static WallVelocities lid_driven(double lid_speed) {
    WallVelocities w;
    w.u_north = lid_speed;
    return w;
  }

  static WallVelocities uniform(double u, double v) {
    return {u, u, u, u, v, v, v, v};
  }
};

}  // namespace hjbpod
