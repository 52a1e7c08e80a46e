#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hjbpod/deim.hpp"
#include "hjbpod/navier_stokes.hpp"
#include "hjbpod/pod.hpp"

namespace hjbpod {

enum class NonlinearityMode { Deim, Exact };

// Psi^T eta(ybar + Psi w) from a full-grid evaluation. Reference path for
// checking DEIM; never serialized.
class ExactNonlinearity {
 public:
  ExactNonlinearity(const CavityFlow& flow, const PodBasis& basis) : flow_(flow), basis_(basis) {}
  Eigen::VectorXd operator()(const Eigen::VectorXd& w) const;

 private:
  CavityFlow flow_;
  PodBasis basis_;
};

// Galerkin reduced model
//   M w' = -nu*A_r w + c + eta_r(w) + B_r u,
// where c = Psi^T (nu*g - nu*A*ybar) collects the mean-flow viscous and wall
// terms and eta_r is the projected advection of ybar + Psi w (DEIM or exact).
struct RomSystem {
  Eigen::MatrixXd mass;       // M_r
  Eigen::MatrixXd stiffness;  // A_r
  Eigen::MatrixXd control;    // B_r, l x N
  Eigen::VectorXd constant;   // c
  double viscosity = 0.0;
  double alpha = 0.0;
  double discount = 0.0;
  double cell_area = 0.0;
  double state_weight = 1.0;  // weight of |w|^2 in the running cost
  DeimOperator deim;
  SampledNonlinearity sampler;
  std::shared_ptr<const ExactNonlinearity> exact;  // only set by assemble_rom

  int dim() const { return static_cast<int>(stiffness.rows()); }
  int num_controls() const { return static_cast<int>(control.cols()); }
};

RomSystem assemble_rom(const PodBasis& basis, const CavityFlow& flow, const DeimOperator& deim, double alpha,
                       double discount, double state_weight = 1.0);

Eigen::VectorXd rom_rhs(const RomSystem& sys, const Eigen::VectorXd& w, const Eigen::VectorXd& u,
                        NonlinearityMode mode = NonlinearityMode::Deim);

struct RomTrajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> controls;  // control held over [t_k, t_k+1)
};

// Classical RK4; the control is sampled at the start of each step and held.
// Aborts with NumericalError once |w| > 1e6 or w is not finite.
RomTrajectory integrate_rom(const RomSystem& sys, const Eigen::VectorXd& w0, const ControlSignal& control,
                            double horizon, double dt, NonlinearityMode mode = NonlinearityMode::Deim);

// One RK4 step with constant control.
Eigen::VectorXd rk4_step(const RomSystem& sys, const Eigen::VectorXd& w, const Eigen::VectorXd& u, double dt,
                         NonlinearityMode mode = NonlinearityMode::Deim);

// L(w, u) = state_weight |w|^2 + alpha |u|^2. With state_weight = cell_area
// the first term approximates |y - ybar|^2 in L2.
double running_cost(const RomSystem& sys, const Eigen::VectorXd& w, const Eigen::VectorXd& u);

struct CostEstimate {
  double value = 0.0;       // trapezoid rule for int_0^T L e^{-lambda t} dt
  double tail_bound = 0.0;  // max L * e^{-lambda T} / lambda
};

CostEstimate discounted_cost(const std::vector<double>& times, const std::vector<double>& rates, double discount);

CostEstimate reduced_cost(const RomSystem& sys, const Eigen::VectorXd& w0, const ControlSignal& control,
                          double horizon, double dt, NonlinearityMode mode = NonlinearityMode::Deim);

// HJBPOD-ROM v1 l, then N, M_r, A_r, B_r, c, nu, alpha, lambda, cell area, state weight,
// the DEIM block and the sampled stencils.
std::string rom_to_text(const RomSystem& sys);
RomSystem rom_from_text(const std::string& text, const std::string& source = "<memory>");
void save_rom(const std::string& path, const RomSystem& sys);
RomSystem load_rom(const std::string& path);

}  // namespace hjbpod
