#include "hjbpod/rom.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "hjbpod/error.hpp"
#include "hjbpod/text_io.hpp"

namespace hjbpod {

Eigen::VectorXd ExactNonlinearity::operator()(const Eigen::VectorXd& w) const {
  return basis_.modes.transpose() * flow_.nonlinearity(reconstruct(basis_, w));
}

RomSystem assemble_rom(const PodBasis& basis, const CavityFlow& flow, const DeimOperator& deim, double alpha,
                       double discount, double state_weight) {
  if (!(basis.grid == flow.grid())) throw ConfigError("basis and flow grids differ");
  if (deim.projection.rows() != basis.size()) throw ConfigError("DEIM projection does not match the basis rank");
  if (!(discount > 0.0) || alpha < 0.0 || !(state_weight > 0.0)) {
    throw ConfigError("need lambda > 0, alpha >= 0 and a positive state weight");
  }
  const auto& ops = flow.operators();
  const Eigen::MatrixXd& psi = basis.modes;
  const double nu = flow.parameters().viscosity;

  RomSystem sys;
  sys.mass = psi.transpose() * psi;
  sys.stiffness = psi.transpose() * (ops.laplacian * psi);
  sys.control = psi.transpose() * ops.control;
  sys.constant = psi.transpose() * (flow.wall_forcing() - nu * (ops.laplacian * basis.mean));
  sys.viscosity = nu;
  sys.alpha = alpha;
  sys.discount = discount;
  sys.cell_area = flow.grid().cell_area();
  sys.state_weight = state_weight;
  sys.deim = deim;
  sys.sampler = SampledNonlinearity(flow.grid(), flow.walls(), flow.parameters().upwind_blend, deim.indices,
                                    basis.mean, psi);
  sys.exact = std::make_shared<ExactNonlinearity>(flow, basis);
  return sys;
}

Eigen::VectorXd rom_rhs(const RomSystem& sys, const Eigen::VectorXd& w, const Eigen::VectorXd& u,
                        NonlinearityMode mode) {
  if (w.size() != sys.dim()) throw ConfigError("reduced state has wrong dimension");
  if (u.size() != sys.num_controls()) throw ConfigError("control has wrong dimension");
  Eigen::VectorXd rhs = sys.constant - sys.viscosity * (sys.stiffness * w);
  if (sys.num_controls() > 0) rhs += sys.control * u;
  if (mode == NonlinearityMode::Exact) {
    if (!sys.exact) throw ConfigError("exact nonlinearity unavailable for a ROM loaded from file");
    rhs += (*sys.exact)(w);
  } else {
    rhs += apply_deim(sys.deim, sys.sampler.evaluate(w));
  }
  // M_r is the identity up to round-off for an orthonormal basis.
  rhs = sys.mass.llt().solve(rhs);
  if (!rhs.allFinite()) throw NumericalError("non-finite reduced right-hand side");
  return rhs;
}

Eigen::VectorXd rk4_step(const RomSystem& sys, const Eigen::VectorXd& w, const Eigen::VectorXd& u, double dt,
                         NonlinearityMode mode) {
  const Eigen::VectorXd k1 = rom_rhs(sys, w, u, mode);
  const Eigen::VectorXd k2 = rom_rhs(sys, w + 0.5 * dt * k1, u, mode);
  const Eigen::VectorXd k3 = rom_rhs(sys, w + 0.5 * dt * k2, u, mode);
  const Eigen::VectorXd k4 = rom_rhs(sys, w + dt * k3, u, mode);
  return w + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

RomTrajectory integrate_rom(const RomSystem& sys, const Eigen::VectorXd& w0, const ControlSignal& control,
                            double horizon, double dt, NonlinearityMode mode) {
  const int n = step_count(horizon, dt);
  RomTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(w0);
  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    const Eigen::VectorXd u = control(t);
    Eigen::VectorXd next = rk4_step(sys, traj.states.back(), u, dt, mode);
    if (!next.allFinite() || next.norm() > 1e6) {
      std::ostringstream msg;
      msg << "reduced trajectory blew up at t=" << (k + 1) * dt;
      throw NumericalError(msg.str());
    }
    traj.controls.push_back(u);
    traj.times.push_back((k + 1) * dt);
    traj.states.push_back(std::move(next));
  }
  return traj;
}

double running_cost(const RomSystem& sys, const Eigen::VectorXd& w, const Eigen::VectorXd& u) {
  return sys.state_weight * w.squaredNorm() + sys.alpha * u.squaredNorm();
}

CostEstimate discounted_cost(const std::vector<double>& times, const std::vector<double>& rates, double discount) {
  if (times.size() != rates.size()) throw ConfigError("cost quadrature needs one rate per time");
  CostEstimate c;
  double lmax = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    lmax = std::max(lmax, std::abs(rates[k]));
    if (k == 0) continue;
    const double a = rates[k - 1] * std::exp(-discount * times[k - 1]);
    const double b = rates[k] * std::exp(-discount * times[k]);
    c.value += 0.5 * (times[k] - times[k - 1]) * (a + b);
  }
  const double horizon = times.empty() ? 0.0 : times.back();
  c.tail_bound = lmax * std::exp(-discount * horizon) / discount;
  return c;
}

CostEstimate reduced_cost(const RomSystem& sys, const Eigen::VectorXd& w0, const ControlSignal& control,
                          double horizon, double dt, NonlinearityMode mode) {
  const RomTrajectory traj = integrate_rom(sys, w0, control, horizon, dt, mode);
  std::vector<double> rates;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const Eigen::VectorXd u = k < traj.controls.size() ? traj.controls[k] : control(traj.times[k]);
    rates.push_back(running_cost(sys, traj.states[k], u));
  }
  return discounted_cost(traj.times, rates, sys.discount);
}

std::string rom_to_text(const RomSystem& sys) {
  std::ostringstream out;
  out << "HJBPOD-ROM v1 " << sys.dim() << '\n' << sys.num_controls() << '\n';
  io::write_matrix(out, sys.mass);
  io::write_matrix(out, sys.stiffness);
  io::write_matrix(out, sys.control);
  io::write_vector(out, sys.constant);
  out << io::format(sys.viscosity) << ' ' << io::format(sys.alpha) << ' ' << io::format(sys.discount) << ' '
      << io::format(sys.cell_area) << ' ' << io::format(sys.state_weight) << '\n';
  out << deim_to_text(sys.deim);
  const SampledNonlinearity& s = sys.sampler;
  const WallVelocities& w = s.walls();
  out << "STENCILS " << s.grid().nx << ' ' << s.grid().ny << ' ' << io::format(s.blend()) << ' ' << s.points().size()
      << '\n';
  for (double x : {w.u_south, w.u_north, w.u_west, w.u_east, w.v_south, w.v_north, w.v_west, w.v_east}) {
    out << io::format(x) << ' ';
  }
  out << '\n';
  for (const auto& p : s.points()) {
    out << p.unknown << ' ' << p.stencil.size() << '\n';
    for (std::size_t i = 0; i < p.stencil.size(); ++i) out << p.stencil[i] << (i + 1 == p.stencil.size() ? '\n' : ' ');
    io::write_vector(out, p.mean, 12);
    io::write_matrix(out, p.modes);
  }
  return out.str();
}

RomSystem rom_from_text(const std::string& text, const std::string& source) {
  io::TokenReader in(text, source);
  in.expect_header("HJBPOD-ROM");
  const long l = in.integer();
  const long n = in.integer();
  if (l < 1 || n < 0) throw FormatError(source + ": invalid ROM dimensions");
  RomSystem sys;
  sys.mass = in.matrix(l, l);
  sys.stiffness = in.matrix(l, l);
  sys.control = in.matrix(l, n);
  sys.constant = in.vector(l);
  sys.viscosity = in.number();
  sys.alpha = in.number();
  sys.discount = in.number();
  sys.cell_area = in.number();
  sys.state_weight = in.number();
  sys.deim = read_deim(in);
  if (sys.deim.projection.rows() != l) throw FormatError(source + ": DEIM block does not match ROM dimension");
  if (in.word() != "STENCILS") throw FormatError(source + ": missing STENCILS block");
  const long nx = in.integer();
  const long ny = in.integer();
  if (nx < 4 || ny < 4) throw FormatError(source + ": invalid stencil grid");
  const double blend = in.number();
  const long count = in.integer();
  if (count != sys.deim.size()) throw FormatError(source + ": stencil count does not match DEIM size");
  WallVelocities w;
  for (double* x : {&w.u_south, &w.u_north, &w.u_west, &w.u_east, &w.v_south, &w.v_north, &w.v_west, &w.v_east}) {
    *x = in.number();
  }
  std::vector<SampledNonlinearity::Point> points;
  for (long i = 0; i < count; ++i) {
    SampledNonlinearity::Point p;
    p.unknown = static_cast<int>(in.integer());
    const long s = in.integer();
    if (s < 1 || s > 32) throw FormatError(source + ": invalid stencil size");
    for (long j = 0; j < s; ++j) p.stencil.push_back(static_cast<int>(in.integer()));
    p.mean = in.vector(s);
    p.modes = in.matrix(s, l);
    points.push_back(std::move(p));
  }
  if (!in.at_end()) throw FormatError(source + ": trailing data after ROM");
  sys.sampler = SampledNonlinearity(build_grid(static_cast<int>(nx), static_cast<int>(ny)), w, blend, std::move(points));
  return sys;
}

void save_rom(const std::string& path, const RomSystem& sys) { io::write_file(path, rom_to_text(sys)); }

RomSystem load_rom(const std::string& path) { return rom_from_text(io::read_file(path), path); }

}  // namespace hjbpod
