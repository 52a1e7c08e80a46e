#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hjbpod/hjb.hpp"
#include "hjbpod/navier_stokes.hpp"
#include "hjbpod/pod.hpp"
#include "hjbpod/rom.hpp"

namespace hjbpod {

enum class ShapeKind { NavierStokesSteady, StokesSteady };

std::string to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(const std::string& name);  // "ns" / "stokes" or the enum names

// The shape function b(x): the steady uncontrolled flow of the given kind.
Eigen::VectorXd shape_function(const CavityGrid& grid, const FlowParameters& params, ShapeKind kind,
                               const SteadyStateOptions& options = {});

// Reduced dynamics, running cost and online feedback map for a scalar control
// set U. Safe to call concurrently.
class RomFeedback {
 public:
  RomFeedback(const RomSystem& rom, const ValueGrid<double>& grid, std::vector<double> controls,
              NonlinearityMode mode = NonlinearityMode::Deim);

  Eigen::VectorXd dynamics(const Eigen::VectorXd& w, int control_index) const;
  double cost(const Eigen::VectorXd& w, int control_index) const;
  int choose(const Eigen::VectorXd& w) const;
  double control(int index) const { return controls_[static_cast<std::size_t>(index)]; }
  const std::vector<double>& controls() const { return controls_; }
  const RomSystem& rom() const { return *rom_; }

  // w -> Phi(w)
  std::function<double(const Eigen::VectorXd&)> law() const;

 private:
  const RomSystem* rom_;
  const ValueGrid<double>* grid_;
  std::vector<double> controls_;
  NonlinearityMode mode_;
};

struct ControlTrace {
  std::vector<double> times;
  std::vector<double> values;

  int switches() const;
};

struct RomClosedLoop {
  RomTrajectory trajectory;
  ControlTrace trace;
};

// Sample-and-hold feedback on the ROM: u_k = Phi(w(t_k)) held over one RK4 step.
RomClosedLoop run_closed_loop_rom(const RomFeedback& feedback, const Eigen::VectorXd& w0, double horizon, double dt);

struct FullClosedLoop {
  Trajectory trajectory;
  ControlTrace trace;
};

// Sample-and-hold feedback on the finite-difference model: w = project(y),
// u = law(w), one projection step with u. The flow must carry one shape.
FullClosedLoop run_closed_loop_full(const CavityFlow& flow, const PodBasis& basis,
                                    const std::function<double(const Eigen::VectorXd&)>& law,
                                    const StaggeredState& initial, double horizon, double dt);

// max_i |field_i - reference_i|
double linf_error(const Eigen::VectorXd& field, const Eigen::VectorXd& reference);

struct TimedField {
  double t = 0.0;
  Eigen::VectorXd velocity;
};

struct ClosedLoopReport {
  ShapeKind shape_kind = ShapeKind::NavierStokesSteady;
  std::vector<double> times;
  std::vector<double> err_controlled;
  std::vector<double> err_uncontrolled;
  ControlTrace control_trace;
  CostEstimate cost_estimate;
};

// Errors against `desired` at the requested times, each sampled at the
// nearest stored field. Throws ConfigError for empty runs or times past the
// horizon.
ClosedLoopReport build_report(const std::vector<TimedField>& controlled, const std::vector<TimedField>& uncontrolled,
                              const Eigen::VectorXd& desired, const std::vector<double>& times, ShapeKind kind);

// Truncated discounted cost cell_area*|y - ybar|^2 + alpha*u^2 along a full run.
CostEstimate full_cost(const CavityGrid& grid, const Trajectory& trajectory, const ControlTrace& trace,
                       const Eigen::VectorXd& desired, double alpha, double discount);

std::vector<TimedField> timed_fields(const Trajectory& trajectory);

// CSV renderings: "t,err_controlled,err_uncontrolled,shape_kind", "t,u", and
// "x,y,u,v" at cell centers.
std::string report_csv(const ClosedLoopReport& report);
std::string control_trace_csv(const ControlTrace& trace);
std::string quiver_csv(const CavityGrid& grid, const Eigen::VectorXd& velocity);

}  // namespace hjbpod
