#include "hjbpod/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "hjbpod/deim.hpp"
#include "hjbpod/error.hpp"
#include "hjbpod/field_io.hpp"
#include "hjbpod/snapshots.hpp"
#include "hjbpod/text_io.hpp"

namespace hjbpod {

namespace {

namespace fs = std::filesystem;

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void ensure_out_dir(const PipelineConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec || !fs::is_directory(c.out)) throw IoError("cannot create output directory " + c.out);
}

// Path of an upstream artifact; throws if the producing stage has not run.
std::string require(const PipelineConfig& c, const std::string& name, Stage producer) {
  const auto path = artifact_path(c, name);
  if (!fs::exists(path)) {
    throw IoError("missing artifact " + path + " (run the '" + to_string(producer) + "' stage first)");
  }
  return path;
}

CavityGrid config_grid(const PipelineConfig& c) { return build_grid(c.nx, c.ny); }

void check_grid(const PipelineConfig& c, const CavityGrid& g, const std::string& what) {
  if (g.nx != c.nx || g.ny != c.ny) {
    throw ConfigError(what + " was written for a " + std::to_string(g.nx) + "x" + std::to_string(g.ny) +
                      " grid; the config asks for " + std::to_string(c.nx) + "x" + std::to_string(c.ny));
  }
}

Eigen::MatrixXd single_shape(const Eigen::VectorXd& b) {
  Eigen::MatrixXd shapes(b.size(), 1);
  shapes.col(0) = b;
  return shapes;
}

std::size_t step_index(double t, double dt) { return static_cast<std::size_t>(std::llround(t / dt)); }

ValueGrid<double> make_value_grid(const PipelineConfig& c, const SnapshotSet& set, const PodBasis& basis) {
  Eigen::MatrixXd coeffs(basis.size(), set.size() + 1);
  for (int j = 0; j < set.size(); ++j) coeffs.col(j) = project(basis, set.snapshot(j));
  coeffs.col(set.size()) = project(basis, Eigen::VectorXd::Zero(basis.mean.size()));
  Eigen::VectorXd lower, upper;
  hjb_bounds(c, coeffs, lower, upper);
  return ValueGrid<double>(lower, upper, c.k, c.h, c.discount);
}

std::vector<std::pair<double, double>> read_trace_csv(const std::string& path) {
  std::istringstream in(io::read_file(path));
  std::string line;
  std::getline(in, line);
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    double t = 0.0, u = 0.0;
    const char* end = line.data() + line.size();
    const auto a = std::from_chars(line.data(), line.data() + (comma == std::string::npos ? 0 : comma), t);
    const auto b = comma == std::string::npos ? a : std::from_chars(line.data() + comma + 1, end, u);
    if (comma == std::string::npos || a.ec != std::errc{} || b.ec != std::errc{} || b.ptr != end) {
      throw FormatError(path + ": malformed row '" + line + "'");
    }
    rows.emplace_back(t, u);
  }
  return rows;
}

std::vector<TimedField> load_fields(const PipelineConfig& c, const std::string& prefix, Stage producer) {
  std::vector<TimedField> fields;
  for (double t : c.report_times) {
    const auto loaded = load_field(require(c, prefix + time_tag(t) + ".txt", producer));
    check_grid(c, loaded.grid, prefix + time_tag(t));
    fields.push_back({loaded.state.t, loaded.state.velocity});
  }
  return fields;
}

}  // namespace

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::Simulate: return "simulate";
    case Stage::Reduce: return "reduce";
    case Stage::SolveHjb: return "solve-hjb";
    case Stage::Control: return "control";
    case Stage::Report: return "report";
  }
  return "?";
}

std::string artifact_path(const PipelineConfig& config, const std::string& name) {
  return (fs::path(config.out) / name).string();
}

std::string time_tag(double t) { return "t" + io::format(t); }

FlowParameters flow_parameters(const PipelineConfig& c) {
  FlowParameters p;
  p.viscosity = c.viscosity;
  p.lid_speed = c.lid_speed;
  p.upwind_blend = c.upwind_blend < 0.0 ? default_upwind_blend(config_grid(c), c.dt, c.lid_speed) : c.upwind_blend;
  return p;
}

void hjb_bounds(const PipelineConfig& c, const Eigen::MatrixXd& coefficients, Eigen::VectorXd& lower,
                Eigen::VectorXd& upper) {
  const auto l = coefficients.rows();
  if (c.bounds_mode == BoundsMode::Explicit) {
    if (static_cast<Eigen::Index>(c.lower.size()) != l) {
      throw ConfigError("explicit bounds have " + std::to_string(c.lower.size()) + " entries; the basis has " +
                        std::to_string(l));
    }
    lower = Eigen::Map<const Eigen::VectorXd>(c.lower.data(), l);
    upper = Eigen::Map<const Eigen::VectorXd>(c.upper.data(), l);
    return;
  }
  const Eigen::VectorXd reach = coefficients.cwiseAbs().rowwise().maxCoeff();
  upper.resize(l);
  for (Eigen::Index a = 0; a < l; ++a) {
    upper[a] = std::max(1.0, std::ceil(c.bounds_factor * reach[a] / c.k - 1e-9)) * c.k;
  }
  lower = -upper;
}

void cmd_simulate(const PipelineConfig& c, std::ostream& log) {
  Stopwatch clock;
  ensure_out_dir(c);
  io::write_file(artifact_path(c, "config.txt"), config_to_text(c, false));
  const auto grid = config_grid(c);
  const auto params = flow_parameters(c);
  const CavityFlow flow(grid, params);

  const double horizon = std::max(c.snapshot_horizon, c.horizon);
  const auto traj = simulate(flow, flow.zero_state(), zero_control(0), horizon, c.dt);
  const auto set = collect(grid, traj, uniform_snapshot_times(c.snapshot_horizon, c.snapshot_count));
  save_snapshots(artifact_path(c, "snapshots.txt"), set);
  for (double t : c.report_times) {
    save_field(artifact_path(c, "uncontrolled_" + time_tag(t) + ".txt"), grid, traj.states[step_index(t, c.dt)]);
  }
  log << "simulate: " << set.size() << " snapshots on [0, " << io::format(c.snapshot_horizon) << "], "
      << traj.states.size() - 1 << " steps (" << clock.seconds() << " s)\n";

  SteadyStateOptions steady;
  steady.tolerance = c.steady_tolerance;
  for (ShapeKind kind : c.shapes) {
    const FlowKind fk = kind == ShapeKind::NavierStokesSteady ? FlowKind::NavierStokes : FlowKind::Stokes;
    const auto state = steady_state(grid, params, fk, steady);
    save_field(artifact_path(c, "shape_" + shape_tag(kind) + ".txt"), grid, state);
    log << "simulate: " << to_string(kind) << " shape, residual "
        << steady_residual(CavityFlow(grid, params, {}, fk), state) << " (" << clock.seconds() << " s)\n";
  }
}

void cmd_reduce(const PipelineConfig& c, std::ostream& log) {
  Stopwatch clock;
  ensure_out_dir(c);
  const auto set = load_snapshots(require(c, "snapshots.txt", Stage::Simulate));
  check_grid(c, set.grid, "snapshots.txt");
  const auto basis = compute_pod(set, c.pod_rank);
  const double gram = (basis.modes.transpose() * basis.modes - Eigen::MatrixXd::Identity(basis.size(), basis.size()))
                          .cwiseAbs()
                          .maxCoeff();
  if (gram > 1e-10) throw NumericalError("POD basis is not orthonormal: |Psi^T Psi - I| = " + io::format(gram));
  save_basis(artifact_path(c, "basis.txt"), basis);

  const auto params = flow_parameters(c);
  const CavityFlow free_flow(set.grid, params);
  Eigen::MatrixXd velocities(set.mean.size(), set.size());
  for (int j = 0; j < set.size(); ++j) velocities.col(j) = set.snapshot(j);
  const auto deim = build_deim(nonlinearity_snapshots(free_flow, velocities), c.deim_rank, basis.modes);
  save_deim(artifact_path(c, "deim.txt"), deim);
  log << "reduce: l = " << basis.size() << ", sigma_1..l = " << basis.singular_values.head(basis.size()).transpose()
      << ", DEIM m = " << deim.size() << ", cond = " << deim.condition << '\n';

  for (ShapeKind kind : c.shapes) {
    const auto shape = load_field(require(c, "shape_" + shape_tag(kind) + ".txt", Stage::Simulate));
    check_grid(c, shape.grid, "shape_" + shape_tag(kind));
    const CavityFlow flow(set.grid, params, single_shape(shape.state.velocity));
    const auto rom = assemble_rom(basis, flow, deim, c.alpha, c.discount, c.state_weight);
    save_rom(artifact_path(c, "rom_" + shape_tag(kind) + ".txt"), rom);
    log << "reduce: " << to_string(kind) << " ROM, B_r = " << rom.control.transpose() << '\n';
  }
  log << "reduce: done (" << clock.seconds() << " s)\n";
}

std::vector<HjbSummary> cmd_solve_hjb(const PipelineConfig& c, std::ostream& log) {
  ensure_out_dir(c);
  const auto set = load_snapshots(require(c, "snapshots.txt", Stage::Simulate));
  const auto basis = load_basis(require(c, "basis.txt", Stage::Reduce));
  std::vector<HjbSummary> out;
  for (ShapeKind kind : c.shapes) {
    Stopwatch clock;
    const auto tag = shape_tag(kind);
    const auto rom = load_rom(require(c, "rom_" + tag + ".txt", Stage::Reduce));
    auto grid = make_value_grid(c, set, basis);
    const RomFeedback feedback(rom, grid, c.controls);
    auto f = [&](const Eigen::VectorXd& x, int u) { return feedback.dynamics(x, u); };
    auto L = [&](const Eigen::VectorXd& x, int u) { return feedback.cost(x, u); };

    IterationOptions options;
    options.tolerance = c.hjb_tolerance;
    options.max_iters = c.hjb_max_iters;
    options.threads = c.threads;
    const auto report = value_iteration(grid, f, L, static_cast<int>(c.controls.size()), options);

    std::ostringstream csv;
    csv << "sweep,residual,ratio\n";
    for (std::size_t s = 0; s < report.residuals.size(); ++s) {
      csv << s + 1 << ',' << io::format(report.residuals[s]) << ',';
      if (s > 0 && report.residuals[s - 1] > 0) csv << io::format(report.residuals[s] / report.residuals[s - 1]);
      csv << '\n';
    }
    io::write_file(artifact_path(c, "hjb_log_" + tag + ".csv"), csv.str());
    if (!report.converged) {
      throw NumericalError("value iteration for " + to_string(kind) + " did not converge in " +
                           std::to_string(report.iterations) + " sweeps (residual " + io::format(report.residual) + ")");
    }
    save_value_grid(artifact_path(c, "value_" + tag + ".txt"), grid);
    save_policy(artifact_path(c, "policy_" + tag + ".txt"), grid, extract_policy(grid, f, L, c.controls, c.threads));

    HjbSummary s;
    s.shape = kind;
    s.nodes = grid.size();
    s.iterations = report.iterations;
    s.residual = report.residual;
    s.converged = report.converged;
    s.max_contraction_ratio = report.max_contraction_ratio;
    out.push_back(s);
    log << "solve-hjb: " << to_string(kind) << ", " << s.nodes << " nodes in [" << grid.lower().transpose() << "] x ["
        << grid.upper().transpose() << "], " << s.iterations << " sweeps, residual " << s.residual
        << ", max ratio " << s.max_contraction_ratio << " (" << clock.seconds() << " s)\n";
  }
  return out;
}

std::vector<ControlSummary> cmd_control(const PipelineConfig& c, std::ostream& log) {
  ensure_out_dir(c);
  const auto basis = load_basis(require(c, "basis.txt", Stage::Reduce));
  check_grid(c, basis.grid, "basis.txt");
  const auto uncontrolled = load_fields(c, "uncontrolled_", Stage::Simulate);
  const auto params = flow_parameters(c);
  std::vector<ControlSummary> out;
  for (ShapeKind kind : c.shapes) {
    Stopwatch clock;
    const auto tag = shape_tag(kind);
    const auto rom = load_rom(require(c, "rom_" + tag + ".txt", Stage::Reduce));
    const auto grid = load_value_grid(require(c, "value_" + tag + ".txt", Stage::SolveHjb));
    const auto shape = load_field(require(c, "shape_" + tag + ".txt", Stage::Simulate));
    const CavityFlow flow(basis.grid, params, single_shape(shape.state.velocity));
    const RomFeedback feedback(rom, grid, c.controls);

    const auto full = run_closed_loop_full(flow, basis, feedback.law(), flow.zero_state(), c.horizon, c.dt);
    std::vector<TimedField> controlled;
    for (double t : c.report_times) {
      const auto& state = full.trajectory.states[step_index(t, c.dt)];
      save_field(artifact_path(c, "controlled_" + tag + "_" + time_tag(t) + ".txt"), basis.grid, state);
      controlled.push_back({state.t, state.velocity});
    }
    ControlSummary s;
    s.shape = kind;
    s.full = build_report(controlled, uncontrolled, basis.mean, c.report_times, kind);
    s.full.control_trace = full.trace;
    s.full.cost_estimate = full_cost(basis.grid, full.trajectory, full.trace, basis.mean, c.alpha, c.discount);

    const Eigen::VectorXd w0 = project(basis, flow.zero_state().velocity);
    const auto reduced = run_closed_loop_rom(feedback, w0, c.horizon, c.dt);
    std::vector<TimedField> reconstructed;
    for (double t : c.report_times) {
      const auto k = step_index(t, c.dt);
      reconstructed.push_back({reduced.trajectory.times[k], reconstruct(basis, reduced.trajectory.states[k])});
    }
    s.rom = build_report(reconstructed, uncontrolled, basis.mean, c.report_times, kind);
    s.rom.control_trace = reduced.trace;
    std::vector<double> rates;
    for (std::size_t k = 0; k < reduced.trajectory.states.size(); ++k) {
      const double u = reduced.trace.values[std::min(k, reduced.trace.values.size() - 1)];
      rates.push_back(running_cost(rom, reduced.trajectory.states[k], Eigen::VectorXd::Constant(1, u)));
    }
    s.rom.cost_estimate = discounted_cost(reduced.trajectory.times, rates, c.discount);

    io::write_file(artifact_path(c, "report_" + tag + ".csv"), report_csv(s.full));
    io::write_file(artifact_path(c, "report_rom_" + tag + ".csv"), report_csv(s.rom));
    io::write_file(artifact_path(c, "control_" + tag + ".csv"), control_trace_csv(full.trace));
    io::write_file(artifact_path(c, "control_rom_" + tag + ".csv"), control_trace_csv(reduced.trace));
    io::write_file(artifact_path(c, "cost_" + tag + ".csv"),
                   "variant,value,tail_bound\nfull," + io::format(s.full.cost_estimate.value) + ',' +
                       io::format(s.full.cost_estimate.tail_bound) + "\nrom," + io::format(s.rom.cost_estimate.value) +
                       ',' + io::format(s.rom.cost_estimate.tail_bound) + '\n');
    log << "control: " << to_string(kind) << ", " << full.trace.switches() << " switches";
    for (std::size_t i = 0; i < c.report_times.size(); ++i) {
      log << "; t=" << io::format(c.report_times[i]) << " controlled " << s.full.err_controlled[i] << " (rom "
          << s.rom.err_controlled[i] << ") uncontrolled " << s.full.err_uncontrolled[i];
    }
    log << " (" << clock.seconds() << " s)\n";
    out.push_back(std::move(s));
  }
  return out;
}

void cmd_report(const PipelineConfig& c, std::ostream& log) {
  ensure_out_dir(c);
  const auto basis = load_basis(require(c, "basis.txt", Stage::Reduce));
  const auto uncontrolled = load_fields(c, "uncontrolled_", Stage::Simulate);

  std::ostringstream tables;
  tables << "table,shape_kind,quantity";
  for (double t : c.report_times) tables << ",t=" << io::format(t);
  tables << '\n';
  for (std::size_t s = 0; s < c.shapes.size(); ++s) {
    const auto kind = c.shapes[s];
    const auto tag = shape_tag(kind);
    const auto controlled = load_fields(c, "controlled_" + tag + "_", Stage::Control);
    const auto rep = build_report(controlled, uncontrolled, basis.mean, c.report_times, kind);
    tables << s + 1 << ',' << to_string(kind) << ",err_controlled";
    for (double e : rep.err_controlled) tables << ',' << io::format(e);
    tables << '\n' << s + 1 << ',' << to_string(kind) << ",err_uncontrolled";
    for (double e : rep.err_uncontrolled) tables << ',' << io::format(e);
    tables << '\n';

    const auto first = time_tag(c.report_times.front());
    io::write_file(artifact_path(c, "quiver_controlled_" + tag + "_" + first + ".csv"),
                   quiver_csv(basis.grid, controlled.front().velocity));

    // Step-plot form of the sampled control: each held value spans [t_k, t_k+1].
    const auto trace = read_trace_csv(require(c, "control_" + tag + ".csv", Stage::Control));
    std::ostringstream steps;
    steps << "t,u\n";
    for (std::size_t k = 0; k < trace.size(); ++k) {
      const double end = k + 1 < trace.size() ? trace[k + 1].first : trace[k].first + c.dt;
      steps << io::format(trace[k].first) << ',' << io::format(trace[k].second) << '\n'
            << io::format(end) << ',' << io::format(trace[k].second) << '\n';
    }
    io::write_file(artifact_path(c, "control_steps_" + tag + ".csv"), steps.str());
  }
  io::write_file(artifact_path(c, "tables.csv"), tables.str());
  io::write_file(artifact_path(c, "quiver_mean.csv"), quiver_csv(basis.grid, basis.mean));
  io::write_file(artifact_path(c, "quiver_uncontrolled_" + time_tag(c.report_times.front()) + ".csv"),
                 quiver_csv(basis.grid, uncontrolled.front().velocity));
  log << "report: wrote tables.csv, quiver and step-plot data to " << c.out << '\n';
}

RunSummary cmd_run_all(const PipelineConfig& c, std::ostream& log) {
  RunSummary summary;
  cmd_simulate(c, log);
  cmd_reduce(c, log);
  summary.hjb = cmd_solve_hjb(c, log);
  summary.control = cmd_control(c, log);
  cmd_report(c, log);
  return summary;
}

}  // namespace hjbpod
