#pragma once

#include <string>
#include <vector>

#include "hjbpod/closed_loop.hpp"

namespace hjbpod {

enum class BoundsMode { Auto, Explicit };

// Everything the pipeline needs; the defaults are the lid-driven cavity
// experiment. There is no randomness anywhere, so there is no seed.
struct PipelineConfig {
  int nx = 64;
  int ny = 64;
  double viscosity = 0.01;
  double lid_speed = 1.0;
  double alpha = 0.01;
  double discount = 1.0;  // lambda
  std::vector<double> controls{-1.0, 0.0, 1.0};
  int pod_rank = 3;
  int deim_rank = 6;
  double snapshot_horizon = 4.0;
  int snapshot_count = 80;
  double k = 0.2;
  double h = 0.04;
  BoundsMode bounds_mode = BoundsMode::Auto;
  double bounds_factor = 1.5;
  std::vector<double> lower;  // explicit mode only
  std::vector<double> upper;
  double dt = 0.01;
  double horizon = 4.0;  // closed-loop runs
  std::vector<double> report_times{0.5, 4.0};
  std::vector<ShapeKind> shapes{ShapeKind::NavierStokesSteady, ShapeKind::StokesSteady};
  double state_weight = 1.0;
  double upwind_blend = -1.0;  // < 0: derived from dt and the lid speed
  double steady_tolerance = 1e-8;
  double hjb_tolerance = 1e-6;
  int hjb_max_iters = 100000;
  int threads = 1;
  std::string out = "out";
};

// Parses flat `key = value` text with `#` comments. Unknown keys, malformed
// values and inconsistent settings (e.g. lambda*h >= 1) throw ConfigError.
PipelineConfig parse_config(const std::string& text, const std::string& source = "config");
PipelineConfig load_config(const std::string& path);

// Applies one `key=value` assignment and re-validates.
void apply_override(PipelineConfig& config, const std::string& assignment);
void set_key(PipelineConfig& config, const std::string& key, const std::string& value);
void validate(const PipelineConfig& config);

// Canonical text form; parse_config(config_to_text(c)) == c. Without
// `with_out` the output directory is omitted, so the echo stored next to the
// artifacts does not depend on where they live.
std::string config_to_text(const PipelineConfig& config, bool with_out = true);

std::string shape_tag(ShapeKind kind);  // "ns" / "stokes"

}  // namespace hjbpod
