#include <doctest.h>

#include <cmath>

#include "hjbpod/error.hpp"
#include "hjbpod/rom.hpp"
#include "support.hpp"

using namespace hjbpod;

namespace {

struct RomFixture {
  CavityFlow flow;
  RomSystem rom;
};

const RomFixture& fixture() {
  static const RomFixture f = [] {
    const auto& c = testing::small_cavity();
    CavityFlow flow(c.grid, c.params, testing::shape_matrix(c.steady.velocity));
    auto rom = assemble_rom(c.basis, flow, c.deim, 0.01, 1.0);
    return RomFixture{flow, rom};
  }();
  return f;
}

}  // namespace

TEST_SUITE("rom") {

TEST_CASE("mass matrix is the identity for an orthonormal basis") {
  const auto& rom = fixture().rom;
  CHECK((rom.mass - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((rom.stiffness - rom.stiffness.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * rom.stiffness.norm());
  CHECK(rom.dim() == 3);
  CHECK(rom.num_controls() == 1);
}

TEST_CASE("exact reduced right-hand side is the Galerkin projection of the full one") {
  const auto& [flow, rom] = fixture();
  const auto& basis = testing::small_cavity().basis;
  for (unsigned seed : {3u, 4u}) {
    const Eigen::VectorXd w = 4.0 * testing::random_vector(3, seed);
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, seed == 3u ? 1.0 : -0.5);
    // Psi is discretely divergence free, so the pressure term drops out.
    const Eigen::VectorXd want = basis.modes.transpose() * flow.momentum_rhs(basis.mean + basis.modes * w, u);
    const Eigen::VectorXd got = rom_rhs(rom, w, u, NonlinearityMode::Exact);
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-9 * want.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("control enters linearly") {
  const auto& rom = fixture().rom;
  const Eigen::VectorXd w = testing::random_vector(3, 6);
  auto f = [&](double u) { return rom_rhs(rom, w, Eigen::VectorXd::Constant(1, u)); };
  const Eigen::VectorXd second = f(1.0) - 2.0 * f(0.0) + f(-1.0);
  CHECK(second.cwiseAbs().maxCoeff() <= 1e-10 * f(0.0).cwiseAbs().maxCoeff());
  CHECK(((f(1.0) - f(0.0)) - rom.control.col(0)).cwiseAbs().maxCoeff() <= 1e-10 * rom.control.norm());
}

TEST_CASE("DEIM and exact nonlinearity agree on the snapshot coefficients") {
  const auto& rom = fixture().rom;
  const auto& c = testing::small_cavity();
  const Eigen::VectorXd u = Eigen::VectorXd::Zero(1);
  double worst = 0.0, scale = 0.0;
  for (int j = 0; j < c.snapshots.size(); ++j) {
    const Eigen::VectorXd w = project(c.basis, c.snapshots.snapshot(j));
    const Eigen::VectorXd exact = rom_rhs(rom, w, u, NonlinearityMode::Exact);
    worst = std::max(worst, (rom_rhs(rom, w, u) - exact).cwiseAbs().maxCoeff());
    scale = std::max(scale, exact.cwiseAbs().maxCoeff());
  }
  // m = 6 sampled rows; an approximation, not an identity
  CHECK(worst <= 0.1 * scale);
}

TEST_CASE("RK4 converges at fourth order") {
  const auto& rom = fixture().rom;
  const Eigen::VectorXd w0 = project(testing::small_cavity().basis, Eigen::VectorXd::Zero(rom.sampler.grid().num_velocity()));
  const auto control = constant_control(Eigen::VectorXd::Constant(1, 0.5));
  auto end = [&](double dt) { return integrate_rom(rom, w0, control, 0.4, dt).states.back(); };
  const Eigen::VectorXd a = end(0.04), b = end(0.02), c = end(0.01);
  const double ratio = (a - b).norm() / (b - c).norm();
  CHECK(ratio == doctest::Approx(16.0).epsilon(0.2));
}

TEST_CASE("integrate_rom samples and holds the control") {
  const auto& rom = fixture().rom;
  int calls = 0;
  const ControlSignal signal = [&](double t) {
    ++calls;
    return Eigen::VectorXd::Constant(1, t < 0.05 ? 1.0 : -1.0);
  };
  const auto traj = integrate_rom(rom, Eigen::VectorXd::Zero(3), signal, 0.1, 0.01);
  CHECK(traj.states.size() == 11);
  CHECK(calls == 10);
  CHECK(traj.controls[4][0] == 1.0);
  CHECK(traj.controls[5][0] == -1.0);
  CHECK_THROWS_AS(integrate_rom(rom, Eigen::VectorXd::Zero(3), signal, 0.1, -0.01), ConfigError);
}

TEST_CASE("running cost") {
  auto rom = fixture().rom;
  CHECK(running_cost(rom, Eigen::Vector3d(1, 0, 0), Eigen::VectorXd::Zero(1)) == 1.0);
  CHECK(running_cost(rom, Eigen::Vector3d::Zero(), Eigen::VectorXd::Ones(1)) == doctest::Approx(0.01));
  rom.state_weight = rom.cell_area;
  CHECK(running_cost(rom, Eigen::Vector3d(0, 1, 0), Eigen::VectorXd::Zero(1)) == doctest::Approx(1.0 / 256));
}

TEST_CASE("discounted cost of a constant rate") {
  std::vector<double> t, r;
  for (int k = 0; k <= 400; ++k) {
    t.push_back(0.01 * k);
    r.push_back(2.0);
  }
  const auto c = discounted_cost(t, r, 1.0);
  CHECK(c.value == doctest::Approx(2.0 * (1.0 - std::exp(-4.0))).epsilon(1e-5));
  CHECK(c.tail_bound == doctest::Approx(2.0 * std::exp(-4.0)));
}

TEST_CASE("assemble_rom preconditions") {
  const auto& c = testing::small_cavity();
  const auto& flow = fixture().flow;
  CHECK_THROWS_AS(assemble_rom(c.basis, flow, c.deim, 0.01, 0.0), ConfigError);
  CHECK_THROWS_AS(assemble_rom(c.basis, flow, c.deim, -1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(assemble_rom(c.basis, flow, c.deim, 0.01, 1.0, 0.0), ConfigError);
}

}  // TEST_SUITE
