#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "hjbpod/grid.hpp"
#include "hjbpod/operators.hpp"

namespace hjbpod {

enum class FlowKind { NavierStokes, Stokes };

struct StaggeredState {
  Eigen::VectorXd velocity;  // u faces followed by v faces
  Eigen::VectorXd pressure;  // one value per cell, gauge p(0,0) = 0
  double t = 0.0;
};

struct FlowParameters {
  double viscosity = 0.01;
  double lid_speed = 1.0;
  double upwind_blend = 0.0;
};

// Default donor-cell weight:
// min(1.2 * dt * speed / h, 1).
double default_upwind_blend(const CavityGrid& grid, double dt, double speed);

// Controlled lid-driven cavity. Immutable; the momentum right-hand side is
//   f(y, u) = -nu*A*y + nu*g + eta(y) + B*u
// with eta omitted for FlowKind::Stokes.
class CavityFlow {
 public:
  CavityFlow(const CavityGrid& grid, const FlowParameters& params, const Eigen::MatrixXd& shapes = {},
             FlowKind kind = FlowKind::NavierStokes);

  const CavityGrid& grid() const { return ops_.grid; }
  const SemiDiscreteOperators& operators() const { return ops_; }
  const FlowParameters& parameters() const { return params_; }
  FlowKind kind() const { return kind_; }
  WallVelocities walls() const { return WallVelocities::lid_driven(params_.lid_speed); }
  // nu * g
  const Eigen::VectorXd& wall_forcing() const { return wall_forcing_; }
  int num_controls() const { return static_cast<int>(ops_.control.cols()); }

  StaggeredState zero_state() const;
  Eigen::VectorXd nonlinearity(const Eigen::VectorXd& velocity) const;
  Eigen::VectorXd momentum_rhs(const Eigen::VectorXd& velocity, const Eigen::VectorXd& control) const;

  // Advective bound 0.8 * min(hx, hy) / max(|y|_inf, lid speed); infinite for Stokes.
  double max_stable_dt(const Eigen::VectorXd& velocity) const;

 private:
  FlowParameters params_;
  FlowKind kind_;
  SemiDiscreteOperators ops_;
  Eigen::VectorXd wall_forcing_;
};

// One semi-implicit projection step of fixed size:
//   (I/dt + nu*A) y' + C p' = y/dt + eta(y) + B*u + nu*g,   D y' = 0.
// Advection is explicit; viscosity, the forcing and the pressure projection
// are handled by one coupled sparse solve whose LU factors are computed once
// in the constructor.
class ProjectionStepper {
 public:
  ProjectionStepper(const CavityFlow& flow, double dt);

  // Throws NumericalError on a violated stability bound or non-finite state.
  StaggeredState step(const StaggeredState& state, const Eigen::VectorXd& control) const;

  double dt() const { return dt_; }
  const CavityFlow& flow() const { return *flow_; }

 private:
  struct Factorization;
  const CavityFlow* flow_;
  double dt_;
  std::shared_ptr<const Factorization> lu_;
};

// Convenience wrapper; factors the step matrix on every call.
StaggeredState step(const CavityFlow& flow, const StaggeredState& state, const Eigen::VectorXd& control,
                    double dt);

struct SteadyStateOptions {
  double tolerance = 1e-8;
  long max_steps = 200000;
  double pseudo_dt = 0.0;  // 0 selects half the advective bound at unit speed
};

// Steady uncontrolled flow of the given kind. Stokes solves the linear
// saddle-point system directly; Navier-Stokes marches in pseudo-time from the
// Stokes solution until |y_{n+1} - y_n|_inf / dt < tolerance.
StaggeredState steady_state(const CavityGrid& grid, const FlowParameters& params, FlowKind kind,
                            const SteadyStateOptions& options = {});

// |P f(y, 0)|_inf for the discrete Leray projector P, i.e. the time derivative
// of the uncontrolled semi-discrete flow at y.
double steady_residual(const CavityFlow& flow, const StaggeredState& state);

using ControlSignal = std::function<Eigen::VectorXd(double)>;

ControlSignal constant_control(const Eigen::VectorXd& value);
ControlSignal zero_control(int num_controls);

struct Trajectory {
  std::vector<StaggeredState> states;  // t = 0, dt, ..., T
  int snapshot_stride = 1;

  // Indices of the states flagged for snapshot export (every stride-th, t > 0).
  std::vector<int> snapshot_steps() const;
};

// Number of steps k with k*dt = T; throws ConfigError if T is not a multiple of dt.
int step_count(double horizon, double dt);

Trajectory simulate(const CavityFlow& flow, const StaggeredState& initial, const ControlSignal& control,
                    double horizon, double dt, int snapshot_stride = 1);

// Kinetic energy (1/2) |y|^2 scaled by the cell area.
double kinetic_energy(const CavityGrid& grid, const Eigen::VectorXd& velocity);

}  // namespace hjbpod
