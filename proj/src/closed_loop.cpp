#include "hjbpod/closed_loop.hpp"

#include <cmath>
#include <sstream>

#include "hjbpod/error.hpp"
#include "hjbpod/text_io.hpp"

namespace hjbpod {

std::string to_string(ShapeKind kind) {
  return kind == ShapeKind::NavierStokesSteady ? "NavierStokesSteady" : "StokesSteady";
}

ShapeKind shape_kind_from_string(const std::string& name) {
  if (name == "ns" || name == "NavierStokesSteady") return ShapeKind::NavierStokesSteady;
  if (name == "stokes" || name == "StokesSteady") return ShapeKind::StokesSteady;
  throw ConfigError("unknown shape kind '" + name + "' (expected ns or stokes)");
}

Eigen::VectorXd shape_function(const CavityGrid& grid, const FlowParameters& params, ShapeKind kind,
                               const SteadyStateOptions& options) {
  const FlowKind flow = kind == ShapeKind::NavierStokesSteady ? FlowKind::NavierStokes : FlowKind::Stokes;
  return steady_state(grid, params, flow, options).velocity;
}

RomFeedback::RomFeedback(const RomSystem& rom, const ValueGrid<double>& grid, std::vector<double> controls,
                         NonlinearityMode mode)
    : rom_(&rom), grid_(&grid), controls_(std::move(controls)), mode_(mode) {
  if (controls_.empty()) throw ConfigError("control set must be nonempty");
  if (rom.num_controls() != 1) throw ConfigError("feedback synthesis supports a single shape function");
  if (grid.dim() != rom.dim()) throw ConfigError("value grid dimension differs from the ROM dimension");
}

Eigen::VectorXd RomFeedback::dynamics(const Eigen::VectorXd& w, int control_index) const {
  return rom_rhs(*rom_, w, Eigen::VectorXd::Constant(1, control(control_index)), mode_);
}

double RomFeedback::cost(const Eigen::VectorXd& w, int control_index) const {
  return running_cost(*rom_, w, Eigen::VectorXd::Constant(1, control(control_index)));
}

int RomFeedback::choose(const Eigen::VectorXd& w) const {
  return feedback_at(
      *grid_, w, [this](const Eigen::VectorXd& x, int u) { return dynamics(x, u); },
      [this](const Eigen::VectorXd& x, int u) { return cost(x, u); }, controls_);
}

std::function<double(const Eigen::VectorXd&)> RomFeedback::law() const {
  return [this](const Eigen::VectorXd& w) { return control(choose(w)); };
}

int ControlTrace::switches() const {
  int n = 0;
  for (std::size_t k = 1; k < values.size(); ++k) n += values[k] != values[k - 1];
  return n;
}

RomClosedLoop run_closed_loop_rom(const RomFeedback& feedback, const Eigen::VectorXd& w0, double horizon, double dt) {
  const int n = step_count(horizon, dt);
  RomClosedLoop out;
  out.trajectory.times.push_back(0.0);
  out.trajectory.states.push_back(w0);
  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    const Eigen::VectorXd& w = out.trajectory.states.back();
    const double u = feedback.control(feedback.choose(w));
    const Eigen::VectorXd uv = Eigen::VectorXd::Constant(1, u);
    Eigen::VectorXd next = rk4_step(feedback.rom(), w, uv, dt);
    if (!next.allFinite() || next.norm() > 1e6) {
      std::ostringstream msg;
      msg << "closed-loop reduced trajectory blew up at t=" << t + dt;
      throw NumericalError(msg.str());
    }
    out.trace.times.push_back(t);
    out.trace.values.push_back(u);
    out.trajectory.controls.push_back(uv);
    out.trajectory.times.push_back((k + 1) * dt);
    out.trajectory.states.push_back(std::move(next));
  }
  return out;
}

FullClosedLoop run_closed_loop_full(const CavityFlow& flow, const PodBasis& basis,
                                    const std::function<double(const Eigen::VectorXd&)>& law,
                                    const StaggeredState& initial, double horizon, double dt) {
  if (flow.num_controls() != 1) throw ConfigError("closed loop needs exactly one shape function");
  if (basis.size() < 1) throw ConfigError("closed loop needs a basis of rank >= 1");
  if (!(basis.grid == flow.grid())) throw ConfigError("basis and flow grids differ");
  const int n = step_count(horizon, dt);
  FullClosedLoop out;
  out.trajectory.states.reserve(n + 1);
  out.trajectory.states.push_back(initial);
  if (n == 0) return out;
  const ProjectionStepper stepper(flow, dt);
  for (int k = 0; k < n; ++k) {
    const StaggeredState& y = out.trajectory.states.back();
    const double u = law(project(basis, y.velocity));
    StaggeredState next = stepper.step(y, Eigen::VectorXd::Constant(1, u));
    next.t = initial.t + (k + 1) * dt;
    out.trace.times.push_back(initial.t + k * dt);
    out.trace.values.push_back(u);
    out.trajectory.states.push_back(std::move(next));
  }
  return out;
}

double linf_error(const Eigen::VectorXd& field, const Eigen::VectorXd& reference) {
  if (field.size() != reference.size()) throw ConfigError("fields live on different grids");
  if (field.size() == 0) return 0.0;
  return (field - reference).cwiseAbs().maxCoeff();
}

namespace {

const TimedField& nearest(const std::vector<TimedField>& run, double t, const char* name) {
  if (run.empty()) throw ConfigError(std::string("empty ") + name + " run");
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  if (t > run.back().t + tol || t < run.front().t - tol) {
    std::ostringstream msg;
    msg << "report time " << t << " outside the " << name << " run [" << run.front().t << ", " << run.back().t << "]";
    throw ConfigError(msg.str());
  }
  const TimedField* best = &run.front();
  for (const auto& f : run) {
    if (std::abs(f.t - t) < std::abs(best->t - t)) best = &f;
  }
  return *best;
}

}  // namespace

ClosedLoopReport build_report(const std::vector<TimedField>& controlled, const std::vector<TimedField>& uncontrolled,
                              const Eigen::VectorXd& desired, const std::vector<double>& times, ShapeKind kind) {
  ClosedLoopReport r;
  r.shape_kind = kind;
  for (double t : times) {
    r.times.push_back(t);
    r.err_controlled.push_back(linf_error(nearest(controlled, t, "controlled").velocity, desired));
    r.err_uncontrolled.push_back(linf_error(nearest(uncontrolled, t, "uncontrolled").velocity, desired));
  }
  return r;
}

CostEstimate full_cost(const CavityGrid& grid, const Trajectory& trajectory, const ControlTrace& trace,
                       const Eigen::VectorXd& desired, double alpha, double discount) {
  std::vector<double> times, rates;
  for (std::size_t k = 0; k < trajectory.states.size(); ++k) {
    const auto& s = trajectory.states[k];
    const double u = trace.values.empty() ? 0.0 : trace.values[std::min(k, trace.values.size() - 1)];
    times.push_back(s.t);
    rates.push_back(grid.cell_area() * (s.velocity - desired).squaredNorm() + alpha * u * u);
  }
  return discounted_cost(times, rates, discount);
}

std::vector<TimedField> timed_fields(const Trajectory& trajectory) {
  std::vector<TimedField> out;
  out.reserve(trajectory.states.size());
  for (const auto& s : trajectory.states) out.push_back({s.t, s.velocity});
  return out;
}

std::string report_csv(const ClosedLoopReport& report) {
  std::ostringstream out;
  out << "t,err_controlled,err_uncontrolled,shape_kind\n";
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    out << io::format(report.times[i]) << ',' << io::format(report.err_controlled[i]) << ','
        << io::format(report.err_uncontrolled[i]) << ',' << to_string(report.shape_kind) << '\n';
  }
  return out.str();
}

std::string control_trace_csv(const ControlTrace& trace) {
  std::ostringstream out;
  out << "t,u\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    out << io::format(trace.times[i]) << ',' << io::format(trace.values[i]) << '\n';
  }
  return out.str();
}

// Cell-center averages only involve wall-normal data, which is zero.
std::string quiver_csv(const CavityGrid& g, const Eigen::VectorXd& velocity) {
  std::ostringstream out;
  out << "x,y,u,v\n";
  auto u = [&](int i, int j) { return (i == 0 || i == g.nx) ? 0.0 : velocity[g.u_index(i, j)]; };
  auto v = [&](int i, int j) { return (j == 0 || j == g.ny) ? 0.0 : velocity[g.v_index(i, j)]; };
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      out << io::format((i + 0.5) * g.hx) << ',' << io::format((j + 0.5) * g.hy) << ','
          << io::format(0.5 * (u(i, j) + u(i + 1, j))) << ',' << io::format(0.5 * (v(i, j) + v(i, j + 1))) << '\n';
    }
  }
  return out.str();
}

}  // namespace hjbpod
