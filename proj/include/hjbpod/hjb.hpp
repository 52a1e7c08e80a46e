#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "hjbpod/error.hpp"

namespace hjbpod {

// Value function V_{h,k} on a uniform tensor grid over a box in R^l.
// Nodes are ordered lexicographically with the last axis fastest.
template <class Scalar = double>
class ValueGrid {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  // Containing cell of a (clamped) point: linear index of the lower corner and
  // the local coordinate in [0, 1] along every axis.
  struct Cell {
    std::int64_t base = 0;
    Vector fraction;
  };

  ValueGrid() = default;

  ValueGrid(const Vector& lower, const Vector& upper, Scalar spacing, Scalar time_step, Scalar discount)
      : lower_(lower), upper_(upper), spacing_(spacing), time_step_(time_step), discount_(discount) {
    if (lower.size() < 1 || lower.size() != upper.size()) throw ConfigError("value grid bounds must match in dimension >= 1");
    if (!(spacing > 0) || !(time_step > 0) || !(discount > 0)) throw ConfigError("value grid needs k, h, lambda > 0");
    if (!(discount * time_step < 1)) throw ConfigError("lambda*h must be < 1 for the scheme to contract");
    const auto l = lower.size();
    counts_.resize(l);
    strides_.resize(l);
    std::int64_t total = 1;
    for (Eigen::Index a = l - 1; a >= 0; --a) {
      if (!(upper[a] > lower[a])) throw ConfigError("value grid bounds must be nonempty on every axis");
      const Scalar cells = (upper[a] - lower[a]) / spacing;
      const auto rounded = static_cast<std::int64_t>(std::llround(cells));
      if (std::abs(cells - static_cast<Scalar>(rounded)) > Scalar(1e-9) * std::max<Scalar>(1, cells)) {
        throw ConfigError("box extent on axis " + std::to_string(a) + " is not a multiple of k");
      }
      counts_[a] = static_cast<int>(rounded) + 1;
      strides_[a] = total;
      total *= counts_[a];
    }
    values_.assign(static_cast<std::size_t>(total), Scalar(0));
    corner_offsets_.resize(std::size_t{1} << l);
    for (std::size_t mask = 0; mask < corner_offsets_.size(); ++mask) {
      std::int64_t off = 0;
      for (Eigen::Index a = 0; a < l; ++a) {
        if (mask & (std::size_t{1} << a)) off += strides_[a];
      }
      corner_offsets_[mask] = off;
    }
  }

  int dim() const { return static_cast<int>(lower_.size()); }
  std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  Scalar spacing() const { return spacing_; }
  Scalar time_step() const { return time_step_; }
  Scalar discount() const { return discount_; }
  Scalar contraction() const { return Scalar(1) - discount_ * time_step_; }
  const std::vector<int>& counts() const { return counts_; }
  std::vector<Scalar>& values() { return values_; }
  const std::vector<Scalar>& values() const { return values_; }

  Vector node(std::int64_t index) const {
    Vector x(dim());
    for (int a = 0; a < dim(); ++a) {
      const std::int64_t i = (index / strides_[a]) % counts_[a];
      x[a] = lower_[a] + static_cast<Scalar>(i) * spacing_;
    }
    return x;
  }

  Vector clamp(const Vector& x) const { return x.cwiseMax(lower_).cwiseMin(upper_); }

  Cell locate(const Vector& x) const {
    Cell c;
    c.fraction.resize(dim());
    for (int a = 0; a < dim(); ++a) {
      const Scalar s = (std::clamp(x[a], lower_[a], upper_[a]) - lower_[a]) / spacing_;
      auto i = static_cast<std::int64_t>(std::floor(s));
      i = std::clamp<std::int64_t>(i, 0, counts_[a] - 2);
      c.base += i * strides_[a];
      c.fraction[a] = std::clamp<Scalar>(s - static_cast<Scalar>(i), 0, 1);
    }
    return c;
  }

  // Multilinear interpolation of `data` (laid out like values()).
  Scalar interpolate(const std::vector<Scalar>& data, std::int64_t base, const Scalar* fraction) const {
    Scalar sum = 0;
    for (std::size_t mask = 0; mask < corner_offsets_.size(); ++mask) {
      Scalar w = 1;
      for (int a = 0; a < dim(); ++a) w *= (mask & (std::size_t{1} << a)) ? fraction[a] : Scalar(1) - fraction[a];
      if (w != 0) sum += w * data[static_cast<std::size_t>(base + corner_offsets_[mask])];
    }
    return sum;
  }

  // I_1[V](x), x clamped componentwise to the box first.
  Scalar interpolate(const Vector& x) const {
    const Cell c = locate(x);
    return interpolate(values_, c.base, c.fraction.data());
  }

  std::int64_t nearest_node(const Vector& x) const {
    std::int64_t idx = 0;
    for (int a = 0; a < dim(); ++a) {
      const Scalar s = (std::clamp(x[a], lower_[a], upper_[a]) - lower_[a]) / spacing_;
      idx += std::clamp<std::int64_t>(std::llround(s), 0, counts_[a] - 1) * strides_[a];
    }
    return idx;
  }

 private:
  Vector lower_;
  Vector upper_;
  Scalar spacing_ = 0;
  Scalar time_step_ = 0;
  Scalar discount_ = 0;
  std::vector<int> counts_;
  std::vector<std::int64_t> strides_;
  std::vector<std::int64_t> corner_offsets_;
  std::vector<Scalar> values_;
};

// Values initialized to zero. Rejects lambda*h >= 1 and boxes whose extent is
// not a multiple of k.
template <class Scalar>
ValueGrid<Scalar> build_value_grid(const typename ValueGrid<Scalar>::Vector& lower,
                                   const typename ValueGrid<Scalar>::Vector& upper, Scalar spacing, Scalar time_step,
                                   Scalar discount) {
  return ValueGrid<Scalar>(lower, upper, spacing, time_step, discount);
}

struct IterationOptions {
  double tolerance = 1e-6;
  long max_iters = 100000;
  int threads = 1;
};

template <class Scalar = double>
struct IterationReport {
  long iterations = 0;
  Scalar residual = 0;
  bool converged = false;
  std::vector<Scalar> residuals;  // sup-norm change per sweep
  // Largest ratio residual_{n+1} / residual_n over all sweeps.
  Scalar max_contraction_ratio = 0;
};

namespace detail {

template <class Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 2 * threads) {
    fn(std::int64_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  const std::int64_t chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::int64_t begin = std::min(n, t * chunk);
    const std::int64_t end = std::min(n, begin + chunk);
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Index of the minimizing control. Values within a relative 1e-12 of the
// minimum are ties, resolved toward the control of smallest magnitude and then
// the lowest index.
template <class Scalar>
int select_control(const std::vector<Scalar>& q, const std::vector<double>& controls) {
  Scalar best = q[0];
  for (Scalar v : q) best = std::min(best, v);
  const Scalar tol = Scalar(1e-12) * std::max<Scalar>(1, std::abs(best));
  int pick = -1;
  for (int i = 0; i < static_cast<int>(q.size()); ++i) {
    if (q[i] > best + tol) continue;
    if (pick < 0 || std::abs(controls[i]) < std::abs(controls[pick])) pick = i;
  }
  return pick;
}

// Jacobi value iteration for the semi-Lagrangian scheme
//   V(x_i) = min_u { (1 - lambda h) I_1[V](x_i + h f(x_i, u)) + h L(x_i, u) }.
// Arrival cells and running costs are cached per (node, control). Sweeps read
// the previous iterate only, so results do not depend on the thread count.
// `observer(sweep, values)` is called after every sweep when set.
template <class Scalar, class Dynamics, class Cost>
IterationReport<Scalar> value_iteration(
    ValueGrid<Scalar>& grid, Dynamics&& dynamics, Cost&& cost, int num_controls, const IterationOptions& options,
    const std::type_identity_t<std::function<void(long, const std::vector<Scalar>&)>>& observer = {}) {
  if (num_controls < 1) throw ConfigError("control set must be nonempty");
  const int l = grid.dim();
  const std::int64_t n = grid.size();
  const Scalar h = grid.time_step();
  const Scalar beta = grid.contraction();
  if (!(beta > 0 && beta < 1)) throw ConfigError("contraction factor 1 - lambda*h must lie in (0, 1)");

  const auto slots = static_cast<std::size_t>(n) * static_cast<std::size_t>(num_controls);
  std::vector<std::int64_t> base(slots);
  std::vector<Scalar> fraction(slots * static_cast<std::size_t>(l));
  std::vector<Scalar> running(slots);
  detail::parallel_for(n, options.threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      const auto x = grid.node(i);
      for (int u = 0; u < num_controls; ++u) {
        const std::size_t s = static_cast<std::size_t>(i) * num_controls + u;
        const auto cell = grid.locate(x + h * dynamics(x, u));
        base[s] = cell.base;
        for (int a = 0; a < l; ++a) fraction[s * l + a] = cell.fraction[a];
        running[s] = h * cost(x, u);
      }
    }
  });

  IterationReport<Scalar> report;
  std::vector<Scalar> next(static_cast<std::size_t>(n));
  std::vector<Scalar> chunk_residual(static_cast<std::size_t>(std::max(1, options.threads)), 0);
  auto& current = grid.values();
  Scalar previous = 0;
  for (long it = 0; it < options.max_iters; ++it) {
    const int threads = std::max(1, options.threads);
    std::fill(chunk_residual.begin(), chunk_residual.end(), Scalar(0));
    const std::int64_t chunk = (n + threads - 1) / threads;
    detail::parallel_for(n, threads, [&](std::int64_t begin, std::int64_t end) {
      Scalar local = 0;
      for (std::int64_t i = begin; i < end; ++i) {
        Scalar best = 0;
        for (int u = 0; u < num_controls; ++u) {
          const std::size_t s = static_cast<std::size_t>(i) * num_controls + u;
          const Scalar q = beta * grid.interpolate(current, base[s], &fraction[s * l]) + running[s];
          if (u == 0 || q < best) best = q;
        }
        next[static_cast<std::size_t>(i)] = best;
        local = std::max(local, std::abs(best - current[static_cast<std::size_t>(i)]));
      }
      chunk_residual[static_cast<std::size_t>(std::min<std::int64_t>(begin / std::max<std::int64_t>(chunk, 1), threads - 1))] =
          local;
    });
    Scalar residual = 0;
    for (Scalar r : chunk_residual) residual = std::max(residual, r);
    current.swap(next);
    report.iterations = it + 1;
    report.residual = residual;
    report.residuals.push_back(residual);
    if (it > 0 && previous > 0) report.max_contraction_ratio = std::max(report.max_contraction_ratio, residual / previous);
    previous = residual;
    if (observer) observer(it + 1, current);
    if (residual < options.tolerance) {
      report.converged = true;
      break;
    }
  }
  return report;
}

// One-step values q_u(x) = (1 - lambda h) I_1[V](x + h f(x, u)) + h L(x, u).
template <class Scalar, class Dynamics, class Cost>
std::vector<Scalar> one_step_values(const ValueGrid<Scalar>& grid, const typename ValueGrid<Scalar>::Vector& x,
                                    Dynamics&& dynamics, Cost&& cost, int num_controls) {
  std::vector<Scalar> q(static_cast<std::size_t>(num_controls));
  const Scalar h = grid.time_step();
  for (int u = 0; u < num_controls; ++u) {
    q[static_cast<std::size_t>(u)] = grid.contraction() * grid.interpolate(x + h * dynamics(x, u)) + h * cost(x, u);
  }
  return q;
}

// Feedback map Phi tabulated at the grid nodes.
struct FeedbackPolicy {
  std::vector<double> controls;  // the finite control set U
  std::vector<int> choice;       // index into controls, one per node
};

template <class Scalar, class Dynamics, class Cost>
FeedbackPolicy extract_policy(const ValueGrid<Scalar>& grid, Dynamics&& dynamics, Cost&& cost,
                              const std::vector<double>& controls, int threads = 1) {
  FeedbackPolicy p;
  p.controls = controls;
  p.choice.assign(static_cast<std::size_t>(grid.size()), 0);
  const int nu = static_cast<int>(controls.size());
  detail::parallel_for(grid.size(), threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      p.choice[static_cast<std::size_t>(i)] = select_control(one_step_values(grid, grid.node(i), dynamics, cost, nu), controls);
    }
  });
  return p;
}

// Online argmin at an arbitrary state, clamped to the box first.
template <class Scalar, class Dynamics, class Cost>
int feedback_at(const ValueGrid<Scalar>& grid, const typename ValueGrid<Scalar>::Vector& x, Dynamics&& dynamics,
                Cost&& cost, const std::vector<double>& controls) {
  const auto q = one_step_values(grid, grid.clamp(x), dynamics, cost, static_cast<int>(controls.size()));
  return select_control(q, controls);
}

// Node-table fallback: control stored at the nearest node.
template <class Scalar>
int policy_at(const ValueGrid<Scalar>& grid, const FeedbackPolicy& policy, const typename ValueGrid<Scalar>::Vector& x) {
  return policy.choice[static_cast<std::size_t>(grid.nearest_node(x))];
}

// HJBPOD-VALUE v1 l k h lambda, one "lo hi" line per axis, then the node values.
std::string value_grid_to_text(const ValueGrid<double>& grid);
ValueGrid<double> value_grid_from_text(const std::string& text, const std::string& source = "<memory>");
void save_value_grid(const std::string& path, const ValueGrid<double>& grid);
ValueGrid<double> load_value_grid(const std::string& path);

// HJBPOD-POLICY v1 l k h lambda, bounds, "|U| u_1 .. u_|U|", then one control
// index per node.
std::string policy_to_text(const ValueGrid<double>& grid, const FeedbackPolicy& policy);
struct LoadedPolicy {
  ValueGrid<double> grid;  // geometry only, values zero
  FeedbackPolicy policy;
};
LoadedPolicy policy_from_text(const std::string& text, const std::string& source = "<memory>");
void save_policy(const std::string& path, const ValueGrid<double>& grid, const FeedbackPolicy& policy);
LoadedPolicy load_policy(const std::string& path);

}  // namespace hjbpod
