#include "hjbpod/navier_stokes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/SparseLU>

#include "hjbpod/advection.hpp"
#include "hjbpod/error.hpp"

namespace hjbpod {

namespace {

using Triplet = Eigen::Triplet<double>;
using LU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

// Saddle-point matrix [diag_shift*I + nu*A, C; -D, 0] with the pressure in
// cell 0 pinned (its column and the matching continuity row are dropped).
SparseMatrix saddle_matrix(const SemiDiscreteOperators& ops, double diag_shift, double viscosity) {
  const int nv = ops.grid.num_velocity();
  const int nc = ops.grid.num_cells();
  std::vector<Triplet> t;
  t.reserve(ops.laplacian.nonZeros() + 4 * ops.gradient.nonZeros() + nv);
  for (int c = 0; c < ops.laplacian.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(ops.laplacian, c); it; ++it) {
      t.emplace_back(it.row(), it.col(), viscosity * it.value());
    }
  }
  if (diag_shift != 0.0) {
    for (int r = 0; r < nv; ++r) t.emplace_back(r, r, diag_shift);
  }
  for (int c = 0; c < ops.gradient.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(ops.gradient, c); it; ++it) {
      if (it.col() == 0) continue;
      t.emplace_back(it.row(), nv + it.col() - 1, it.value());
      t.emplace_back(nv + it.col() - 1, it.row(), it.value());  // -D = C^T
    }
  }
  SparseMatrix k(nv + nc - 1, nv + nc - 1);
  k.setFromTriplets(t.begin(), t.end());
  k.makeCompressed();
  return k;
}

std::shared_ptr<LU> factor(const SparseMatrix& k) {
  auto lu = std::make_shared<LU>();
  lu->compute(k);
  if (lu->info() != Eigen::Success) throw NumericalError("sparse LU factorization failed: " + lu->lastErrorMessage());
  return lu;
}

void split_solution(const Eigen::VectorXd& x, int nv, StaggeredState& out) {
  out.velocity = x.head(nv);
  out.pressure.resize(x.size() - nv + 1);
  out.pressure[0] = 0.0;
  out.pressure.tail(x.size() - nv) = x.tail(x.size() - nv);
}

std::string time_tag(double t) {
  std::ostringstream s;
  s << " at t=" << t;
  return s.str();
}

}  // namespace

double default_upwind_blend(const CavityGrid& grid, double dt, double speed) {
  return std::min(1.2 * dt * speed / std::min(grid.hx, grid.hy), 1.0);
}

CavityFlow::CavityFlow(const CavityGrid& grid, const FlowParameters& params, const Eigen::MatrixXd& shapes,
                       FlowKind kind)
    : params_(params), kind_(kind), ops_(assemble_operators(grid, shapes)) {
  if (!(params.viscosity > 0.0)) throw ConfigError("viscosity must be positive");
  if (params.upwind_blend < 0.0 || params.upwind_blend > 1.0) throw ConfigError("upwind blend must lie in [0, 1]");
  wall_forcing_ = params.viscosity * laplacian_boundary(grid, walls());
}

StaggeredState CavityFlow::zero_state() const {
  return {Eigen::VectorXd::Zero(grid().num_velocity()), Eigen::VectorXd::Zero(grid().num_cells()), 0.0};
}

Eigen::VectorXd CavityFlow::nonlinearity(const Eigen::VectorXd& velocity) const {
  if (kind_ == FlowKind::Stokes) return Eigen::VectorXd::Zero(velocity.size());
  return hjbpod::nonlinearity(grid(), walls(), params_.upwind_blend, velocity);
}

Eigen::VectorXd CavityFlow::momentum_rhs(const Eigen::VectorXd& velocity, const Eigen::VectorXd& control) const {
  Eigen::VectorXd f = wall_forcing_ - params_.viscosity * (ops_.laplacian * velocity) + nonlinearity(velocity);
  if (num_controls() > 0) f += ops_.control * control;
  return f;
}

double CavityFlow::max_stable_dt(const Eigen::VectorXd& velocity) const {
  if (kind_ == FlowKind::Stokes) return std::numeric_limits<double>::infinity();
  const double speed = std::max(velocity.cwiseAbs().maxCoeff(), std::abs(params_.lid_speed));
  return 0.8 * std::min(grid().hx, grid().hy) / speed;
}

struct ProjectionStepper::Factorization {
  std::shared_ptr<LU> lu;
};

ProjectionStepper::ProjectionStepper(const CavityFlow& flow, double dt) : flow_(&flow), dt_(dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  auto f = std::make_shared<Factorization>();
  f->lu = factor(saddle_matrix(flow.operators(), 1.0 / dt, flow.parameters().viscosity));
  lu_ = std::move(f);
}

StaggeredState ProjectionStepper::step(const StaggeredState& state, const Eigen::VectorXd& control) const {
  const CavityFlow& flow = *flow_;
  const int nv = flow.grid().num_velocity();
  if (state.velocity.size() != nv) throw ConfigError("state does not match the grid");
  if (flow.num_controls() > 0 && control.size() != flow.num_controls()) {
    throw ConfigError("control has " + std::to_string(control.size()) + " entries, expected " +
                      std::to_string(flow.num_controls()));
  }
  if (!control.allFinite()) throw NumericalError("non-finite control" + time_tag(state.t));
  if (dt_ > flow.max_stable_dt(state.velocity) * (1.0 + 1e-12)) {
    throw NumericalError("time step " + std::to_string(dt_) + " exceeds the advective bound " +
                         std::to_string(flow.max_stable_dt(state.velocity)) + time_tag(state.t));
  }

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv + flow.grid().num_cells() - 1);
  rhs.head(nv) = state.velocity / dt_ + flow.nonlinearity(state.velocity) + flow.wall_forcing();
  if (flow.num_controls() > 0) rhs.head(nv) += flow.operators().control * control;

  const Eigen::VectorXd x = lu_->lu->solve(rhs);
  StaggeredState next;
  split_solution(x, nv, next);
  next.t = state.t + dt_;
  if (!next.velocity.allFinite() || !next.pressure.allFinite()) {
    throw NumericalError("non-finite state after step" + time_tag(next.t));
  }
  return next;
}

StaggeredState step(const CavityFlow& flow, const StaggeredState& state, const Eigen::VectorXd& control,
                    double dt) {
  return ProjectionStepper(flow, dt).step(state, control);
}

StaggeredState steady_state(const CavityGrid& grid, const FlowParameters& params, FlowKind kind,
                            const SteadyStateOptions& options) {
  const CavityFlow stokes(grid, params, {}, FlowKind::Stokes);
  const int nv = grid.num_velocity();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv + grid.num_cells() - 1);
  rhs.head(nv) = stokes.wall_forcing();
  StaggeredState state;
  split_solution(factor(saddle_matrix(stokes.operators(), 0.0, params.viscosity))->solve(rhs), nv, state);
  if (kind == FlowKind::Stokes) return state;

  const CavityFlow flow(grid, params, {}, FlowKind::NavierStokes);
  const double dt = options.pseudo_dt > 0.0 ? options.pseudo_dt : 0.5 * flow.max_stable_dt(state.velocity);
  const ProjectionStepper stepper(flow, dt);
  const Eigen::VectorXd none;
  double residual = 0.0;
  for (long n = 0; n < options.max_steps; ++n) {
    StaggeredState next = stepper.step(state, none);
    residual = (next.velocity - state.velocity).cwiseAbs().maxCoeff() / dt;
    state = std::move(next);
    if (residual < options.tolerance) {
      state.t = 0.0;
      return state;
    }
  }
  throw NumericalError("steady Navier-Stokes state not reached: residual " + std::to_string(residual) +
                       " after " + std::to_string(options.max_steps) + " pseudo-time steps");
}

double steady_residual(const CavityFlow& flow, const StaggeredState& state) {
  const int nv = flow.grid().num_velocity();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv + flow.grid().num_cells() - 1);
  rhs.head(nv) = flow.momentum_rhs(state.velocity, Eigen::VectorXd::Zero(flow.num_controls()));
  // Leray projection: [I, C; -D, 0] [Pf; q] = [f; 0].
  const Eigen::VectorXd x = factor(saddle_matrix(flow.operators(), 1.0, 0.0))->solve(rhs);
  return x.head(nv).cwiseAbs().maxCoeff();
}

ControlSignal constant_control(const Eigen::VectorXd& value) {
  return [value](double) { return value; };
}

ControlSignal zero_control(int num_controls) { return constant_control(Eigen::VectorXd::Zero(num_controls)); }

std::vector<int> Trajectory::snapshot_steps() const {
  std::vector<int> steps;
  for (int k = snapshot_stride; k < static_cast<int>(states.size()); k += snapshot_stride) steps.push_back(k);
  return steps;
}

int step_count(double horizon, double dt) {
  if (horizon < 0.0 || !(dt > 0.0)) throw ConfigError("horizon must be non-negative and dt positive");
  const double ratio = horizon / dt;
  const long n = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("horizon " + std::to_string(horizon) + " is not a multiple of dt " + std::to_string(dt));
  }
  return static_cast<int>(n);
}

Trajectory simulate(const CavityFlow& flow, const StaggeredState& initial, const ControlSignal& control,
                    double horizon, double dt, int snapshot_stride) {
  if (snapshot_stride < 1) throw ConfigError("snapshot stride must be at least 1");
  const int n = step_count(horizon, dt);
  Trajectory traj;
  traj.snapshot_stride = snapshot_stride;
  traj.states.reserve(n + 1);
  traj.states.push_back(initial);
  if (n == 0) return traj;
  const ProjectionStepper stepper(flow, dt);
  for (int k = 0; k < n; ++k) {
    const double t = initial.t + k * dt;
    StaggeredState next = stepper.step(traj.states.back(), control(t));
    next.t = initial.t + (k + 1) * dt;
    traj.states.push_back(std::move(next));
  }
  return traj;
}

double kinetic_energy(const CavityGrid& grid, const Eigen::VectorXd& velocity) {
  return 0.5 * grid.cell_area() * velocity.squaredNorm();
}

}  // namespace hjbpod
