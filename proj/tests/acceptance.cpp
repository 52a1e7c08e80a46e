// End-to-end acceptance run on the default configuration. Prints one
// PASS/FAIL line per criterion and exits nonzero if any criterion fails.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "hjbpod/deim.hpp"
#include "hjbpod/error.hpp"
#include "hjbpod/field_io.hpp"
#include "hjbpod/pipeline.hpp"
#include "hjbpod/snapshots.hpp"
#include "hjbpod/text_io.hpp"

using namespace hjbpod;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kRatioAtHalf = 0.2;
constexpr double kRatioAtFour = 0.5;
constexpr double kConstantCostTol = 1e-10;
constexpr double kRoundoffUlps = 4.0;  // slack per sweep, in units of eps * |V|_inf
constexpr double kOracleTol = 1e-3;
constexpr double kGramTol = 1e-10;
constexpr double kTruncationRelTol = 1e-8;
constexpr double kFullRankTol = 1e-8;
constexpr double kDeimSpanTol = 1e-10;
constexpr double kDeimFullRankTol = 1e-8;
constexpr double kDivergenceTol = 1e-8;
constexpr double kFixedPointTol = 10 * 1e-8;

int failures = 0;

void verdict(int id, const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << id << ". " << name << ": " << detail << std::endl;
  if (!ok) ++failures;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

double at(const ClosedLoopReport& r, double t, bool controlled) {
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    if (std::abs(r.times[i] - t) < 1e-12) return controlled ? r.err_controlled[i] : r.err_uncontrolled[i];
  }
  throw ConfigError("report lacks t=" + io::format(t));
}

const ControlSummary& shape(const RunSummary& s, ShapeKind kind) {
  for (const auto& c : s.control) {
    if (c.shape == kind) return c;
  }
  throw ConfigError("run lacks shape " + to_string(kind));
}

// Largest rank whose trailing singular value clears the rank check.
template <class Build>
int largest_rank(int upper, Build&& build) {
  for (int r = upper; r >= 1; --r) {
    try {
      build(r);
      return r;
    } catch (const ConfigError&) {
    } catch (const NumericalError&) {
    }
  }
  return 0;
}

void check_tables(const RunSummary& run) {
  const auto& ns = shape(run, ShapeKind::NavierStokesSteady);
  const auto& st = shape(run, ShapeKind::StokesSteady);
  const double c05 = at(ns.full, 0.5, true), u05 = at(ns.full, 0.5, false);
  const double c4 = at(ns.full, 4.0, true), u4 = at(ns.full, 4.0, false);
  verdict(1, "controlled beats uncontrolled (NS shape)", c05 < u05 && c4 < u4,
          "t=0.5 " + num(c05) + " < " + num(u05) + ", t=4 " + num(c4) + " < " + num(u4));

  const double r05 = c05 / u05, r4 = c4 / u4;
  verdict(2, "error ratio (NS shape)", r05 <= kRatioAtHalf && r4 <= kRatioAtFour,
          "ratio t=0.5 " + num(r05) + " (<= " + num(kRatioAtHalf) + "), t=4 " + num(r4) + " (<= " + num(kRatioAtFour) +
              "); reduced-model reconstruction ratios " + num(at(ns.rom, 0.5, true) / u05) + ", " +
              num(at(ns.rom, 4.0, true) / u4));

  const double s05 = at(st.full, 0.5, true), s4 = at(st.full, 4.0, true);
  verdict(3, "Stokes shape ordering and NS advantage", s05 < u05 && s4 < u4 && c05 < s05,
          "t=0.5 " + num(s05) + " < " + num(u05) + ", t=4 " + num(s4) + " < " + num(u4) + ", NS " + num(c05) +
              " < Stokes " + num(s05) + " at t=0.5");

  const std::set<double> U{-1.0, 0.0, 1.0};
  bool admissible = true;
  for (const auto& c : run.control) {
    for (double u : c.full.control_trace.values) admissible &= U.count(u) == 1;
    for (double u : c.rom.control_trace.values) admissible &= U.count(u) == 1;
  }
  const int switches = ns.full.control_trace.switches();
  verdict(4, "control admissibility and switching", admissible && switches >= 1,
          std::string(admissible ? "all controls in {-1,0,1}" : "inadmissible control emitted") + ", " +
              std::to_string(switches) + " switches (NS shape), " +
              std::to_string(st.full.control_trace.switches()) + " (Stokes shape)");
}

void check_hjb_properties() {
  using Vec = Eigen::VectorXd;
  const double lambda = 1.0, h = 0.04;
  bool ok = true;
  std::ostringstream detail;

  // constant cost
  {
    ValueGrid<double> g(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0), 0.1, h, lambda);
    IterationOptions opts;
    opts.tolerance = 1e-13;
    value_iteration(
        g, [](const Vec& x, int u) { return Vec(Eigen::Vector2d(x[1], -x[0] + u - 1)); },
        [](const Vec&, int) { return 3.0; }, 3, opts);
    double err = 0.0;
    for (double v : g.values()) err = std::max(err, std::abs(v - 3.0 / lambda));
    ok &= err <= kConstantCostTol;
    detail << "|V - c/lambda| = " << num(err);
  }
  // contraction, monotonicity, bound
  {
    ValueGrid<double> g(Vec::Constant(3, -1.0), Vec::Constant(3, 1.0), 0.1, h, lambda);
    auto f = [](const Vec& x, int u) { return Vec(Eigen::Vector3d(x[1], -std::sin(x[0]) + (u - 1), x[0] - x[2])); };
    auto L = [](const Vec& x, int u) { return x.squaredNorm() + 0.01 * (u - 1) * (u - 1); };
    const double max_L = 3.0 + 0.01;
    std::vector<double> prev(static_cast<std::size_t>(g.size()), 0.0);
    bool monotone = true, contracts = true;
    double worst_ratio = 0.0, prev_res = -1.0;
    const double beta = 1.0 - lambda * h;
    value_iteration(g, f, L, 3, IterationOptions{}, [&](long, const std::vector<double>& v) {
      double res = 0.0, vmax = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        monotone &= v[i] >= prev[i];
        res = std::max(res, std::abs(v[i] - prev[i]));
        vmax = std::max(vmax, std::abs(v[i]));
      }
      if (prev_res > 0.0) {
        contracts &= res <= beta * prev_res + kRoundoffUlps * std::numeric_limits<double>::epsilon() * vmax;
        worst_ratio = std::max(worst_ratio, res / prev_res);
      }
      prev_res = res;
      prev = v;
    });
    double vmax = 0.0;
    for (double v : g.values()) vmax = std::max(vmax, v);
    const bool bounded = vmax <= max_L / lambda;
    ok &= monotone && contracts && bounded;
    detail << "; max sweep ratio " << num(worst_ratio) << " (1-lambda h = " << num(beta) << ")"
           << (monotone ? ", monotone" : ", NOT monotone") << ", max V " << num(vmax) << " <= max L/lambda "
           << num(max_L / lambda);
  }
  verdict(5, "HJB property suite", ok, detail.str());
}

void check_hjb_oracle() {
  using Vec = Eigen::VectorXd;
  const std::vector<double> U{-1.0, 0.0, 1.0};
  const double lo = -2.0, k = 0.05, h = 0.01, lambda = 1.0;
  const int n = 81;
  ValueGrid<double> g(Vec::Constant(1, lo), Vec::Constant(1, 2.0), k, h, lambda);
  auto f = [&](const Vec&, int u) { return Vec::Constant(1, U[static_cast<std::size_t>(u)]); };
  auto L = [](const Vec& x, int) { return x[0] * x[0]; };
  IterationOptions opts;
  opts.tolerance = 1e-10;
  value_iteration(g, f, L, 3, opts);

  // brute-force finite-horizon DP over horizon 20
  std::vector<double> v(n, 0.0), next(n);
  for (int step = 0; step < 2000; ++step) {
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double u : U) {
        double s = std::clamp(lo + k * i + h * u, lo, 2.0);
        s = (s - lo) / k;
        const int j = std::min(static_cast<int>(s), n - 2);
        const double a = s - j;
        best = std::min(best, (1 - lambda * h) * ((1 - a) * v[j] + a * v[j + 1]) + h * (lo + k * i) * (lo + k * i));
      }
      next[i] = best;
    }
    v.swap(next);
  }
  double err = 0.0;
  for (int i = 0; i < n; ++i) err = std::max(err, std::abs(v[i] - g.values()[static_cast<std::size_t>(i)]));
  const double u1 = U[static_cast<std::size_t>(feedback_at(g, Vec::Constant(1, 1.0), f, L, U))];
  verdict(6, "HJB oracle equivalence (1D toy)", err <= kOracleTol && u1 == -1.0,
          "sup |V - V_dp| = " + num(err) + " (<= " + num(kOracleTol) + "), feedback at x=1 is " + num(u1));
}

void check_pod(const PipelineConfig& c) {
  const auto set = load_snapshots(artifact_path(c, "snapshots.txt"));
  const auto basis = load_basis(artifact_path(c, "basis.txt"));
  const double gram =
      (basis.modes.transpose() * basis.modes - Eigen::MatrixXd::Identity(basis.size(), basis.size())).cwiseAbs().maxCoeff();

  const Eigen::MatrixXd& Y = set.fluctuations;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Y.transpose() * Y);
  const Eigen::VectorXd lam = eig.eigenvalues().reverse().cwiseMax(0.0);
  const double tail = lam.tail(lam.size() - basis.size()).sum();
  const double resid = (Y - basis.modes * (basis.modes.transpose() * Y)).squaredNorm();
  const double trunc_rel = std::abs(resid - tail) / tail;

  PodBasis full;
  const int r = largest_rank(set.size(), [&](int k) { full = compute_pod(set, k); });
  double full_err = 0.0;
  for (int j = 0; j < set.size(); ++j) {
    const Eigen::VectorXd y = set.snapshot(j);
    full_err = std::max(full_err, (reconstruct(full, project(full, y)) - y).cwiseAbs().maxCoeff() /
                                      y.cwiseAbs().maxCoeff());
  }
  verdict(7, "POD identities", gram <= kGramTol && trunc_rel <= kTruncationRelTol && full_err <= kFullRankTol,
          "|Psi^T Psi - I| = " + num(gram) + ", truncation rel. error " + num(trunc_rel) + ", rank-" +
              std::to_string(r) + " reconstruction error " + num(full_err));
}

void check_deim(const PipelineConfig& c) {
  const auto set = load_snapshots(artifact_path(c, "snapshots.txt"));
  const auto basis = load_basis(artifact_path(c, "basis.txt"));
  const CavityFlow flow(set.grid, flow_parameters(c));
  Eigen::MatrixXd vel(set.mean.size(), set.size());
  for (int j = 0; j < set.size(); ++j) vel.col(j) = set.snapshot(j);
  const Eigen::MatrixXd nl = nonlinearity_snapshots(flow, vel);
  const auto op = build_deim(nl, c.deim_rank, basis.modes);

  auto samples = [](const Eigen::VectorXd& g, const std::vector<int>& idx) {
    Eigen::VectorXd s(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) s[static_cast<Eigen::Index>(i)] = g[idx[i]];
    return s;
  };
  Eigen::VectorXd coeff(op.basis.cols());
  for (Eigen::Index i = 0; i < coeff.size(); ++i) coeff[i] = std::cos(1.7 * static_cast<double>(i) + 0.3);
  const Eigen::VectorXd in_span = op.basis * coeff;
  const double span_err = (deim_interpolate(op.basis, op.indices, in_span) - in_span).cwiseAbs().maxCoeff() /
                          in_span.cwiseAbs().maxCoeff();

  Eigen::VectorXd arbitrary(op.basis.rows());
  for (Eigen::Index i = 0; i < arbitrary.size(); ++i) arbitrary[i] = std::sin(0.37 * static_cast<double>(i));
  const Eigen::VectorXd interp = deim_interpolate(op.basis, op.indices, arbitrary);
  double row_err = 0.0;
  for (int p : op.indices) row_err = std::max(row_err, std::abs(interp[p] - arbitrary[p]));

  DeimOperator full;
  const int m = largest_rank(static_cast<int>(nl.cols()), [&](int k) { full = build_deim(nl, k, basis.modes); });
  double full_err = 0.0;
  for (Eigen::Index j = 0; j < nl.cols(); ++j) {
    const Eigen::VectorXd exact = basis.modes.transpose() * nl.col(j);
    const Eigen::VectorXd approx = apply_deim(full, samples(nl.col(j), full.indices));
    full_err = std::max(full_err, (approx - exact).cwiseAbs().maxCoeff() / std::max(1.0, exact.cwiseAbs().maxCoeff()));
  }
  verdict(8, "DEIM identities", span_err <= kDeimSpanTol && row_err <= kDeimSpanTol && full_err <= kDeimFullRankTol,
          "span error " + num(span_err) + ", selected-row error " + num(row_err) + ", m=" + std::to_string(m) +
              " vs exact Galerkin " + num(full_err));
}

void check_solver(const PipelineConfig& c) {
  const auto grid = build_grid(c.nx, c.ny);
  const auto params = flow_parameters(c);
  const CavityFlow flow(grid, params);
  const auto ops = assemble_operators(grid);

  const auto traj = simulate(flow, flow.zero_state(), zero_control(0), 0.5, c.dt);
  double div = 0.0;
  for (const auto& s : traj.states) {
    if (s.t == 0.0) continue;
    div = std::max(div, divergence_of(ops, s.velocity).cwiseAbs().maxCoeff() / s.velocity.cwiseAbs().maxCoeff());
  }

  const auto steady = load_field(artifact_path(c, "shape_ns.txt")).state;
  const double drift = (step(flow, steady, Eigen::VectorXd(), c.dt).velocity - steady.velocity).cwiseAbs().maxCoeff();

  FlowParameters still = params;
  still.lid_speed = 0.0;
  const CavityFlow stokes(grid, still, {}, FlowKind::Stokes);
  StaggeredState s = traj.states.back();  // a divergence-free, nontrivial field
  double e = kinetic_energy(grid, s.velocity);
  bool decays = true;
  const ProjectionStepper stepper(stokes, c.dt);
  for (int n = 0; n < 100; ++n) {
    s = stepper.step(s, Eigen::VectorXd());
    const double next = kinetic_energy(grid, s.velocity);
    decays &= next <= e;
    e = next;
  }
  verdict(9, "solver invariants", div <= kDivergenceTol && drift <= kFixedPointTol && decays,
          "max relative divergence " + num(div) + ", steady-state drift per step " + num(drift) +
              (decays ? ", Stokes energy non-increasing" : ", Stokes energy INCREASED"));
}

std::vector<std::string> differing_files(const std::string& a, const std::string& b, bool skip_config) {
  std::vector<std::string> diff;
  std::set<std::string> names;
  for (const auto& d : {a, b}) {
    for (const auto& e : fs::directory_iterator(d)) names.insert(e.path().filename().string());
  }
  for (const auto& n : names) {
    if (skip_config && n == "config.txt") continue;
    const auto pa = fs::path(a) / n, pb = fs::path(b) / n;
    if (!fs::exists(pa) || !fs::exists(pb) || io::read_file(pa.string()) != io::read_file(pb.string())) diff.push_back(n);
  }
  return diff;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  std::string work = "acceptance_runs";
  std::vector<std::string> overrides;
  app.add_option("--work", work, "scratch directory for the pipeline runs");
  app.add_option("--override", overrides, "config key=value applied to every run (development only)");
  CLI11_PARSE(app, argc, argv);

  try {
    auto base = parse_config("");
    for (const auto& o : overrides) apply_override(base, o);
    fs::remove_all(work);
    auto a = base, b = base;
    a.out = (fs::path(work) / "run_a").string();
    b.out = (fs::path(work) / "run_b").string();

    std::ostringstream log;
    std::cout << "running the pipeline on a " << base.nx << "x" << base.ny << " grid" << std::endl;
    const auto run = cmd_run_all(a, std::cout);

    check_tables(run);
    check_hjb_properties();
    check_hjb_oracle();
    check_pod(a);
    check_deim(a);
    check_solver(a);

    cmd_run_all(b, log);
    const auto diff = differing_files(a.out, b.out, false);
    auto threaded = b;
    threaded.threads = 4;
    cmd_solve_hjb(threaded, log);  // overwrites run_b's value and policy files
    std::vector<std::string> thread_diff;
    for (const auto& n : differing_files(a.out, b.out, false)) {
      if (n.rfind("value_", 0) == 0 || n.rfind("policy_", 0) == 0 || n.rfind("hjb_log_", 0) == 0) thread_diff.push_back(n);
    }
    std::string detail = diff.empty() ? "two run-all outputs byte-identical" : "differing files: " + diff.front();
    detail += thread_diff.empty() ? "; threads=1 and threads=4 value grids identical"
                                  : "; thread-dependent file: " + thread_diff.front();
    verdict(10, "determinism", diff.empty() && thread_diff.empty(), detail);
  } catch (const std::exception& e) {
    std::cout << "[FAIL] acceptance run aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
