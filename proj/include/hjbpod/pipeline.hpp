#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hjbpod/closed_loop.hpp"
#include "hjbpod/config.hpp"

namespace hjbpod {

// Stages of the offline/online pipeline. Every stage reads only the config and
// files written by earlier stages into config.out, and writes its own files
// atomically. A missing upstream file raises IoError naming the stage that
// produces it.
enum class Stage { Simulate, Reduce, SolveHjb, Control, Report };

std::string to_string(Stage stage);

struct HjbSummary {
  ShapeKind shape = ShapeKind::NavierStokesSteady;
  std::int64_t nodes = 0;
  long iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double max_contraction_ratio = 0.0;
};

struct ControlSummary {
  ShapeKind shape = ShapeKind::NavierStokesSteady;
  ClosedLoopReport full;  // feedback applied to the finite-difference model
  ClosedLoopReport rom;   // reconstruction ybar + Psi w of the reduced closed loop
};

struct RunSummary {
  std::vector<HjbSummary> hjb;
  std::vector<ControlSummary> control;
};

// Flow parameters implied by the config (the upwind blend is resolved here).
FlowParameters flow_parameters(const PipelineConfig& config);

// Coefficient box for the value grid: explicit bounds, or per axis
// +-ceil(factor * max|w_i| / k) * k over the projected snapshots and the
// initial condition.
void hjb_bounds(const PipelineConfig& config, const Eigen::MatrixXd& coefficients, Eigen::VectorXd& lower,
                Eigen::VectorXd& upper);

void cmd_simulate(const PipelineConfig& config, std::ostream& log);
void cmd_reduce(const PipelineConfig& config, std::ostream& log);
std::vector<HjbSummary> cmd_solve_hjb(const PipelineConfig& config, std::ostream& log);
std::vector<ControlSummary> cmd_control(const PipelineConfig& config, std::ostream& log);
void cmd_report(const PipelineConfig& config, std::ostream& log);
RunSummary cmd_run_all(const PipelineConfig& config, std::ostream& log);

// Artifact names inside config.out.
std::string artifact_path(const PipelineConfig& config, const std::string& name);
std::string time_tag(double t);  // "t0.5"

}  // namespace hjbpod
