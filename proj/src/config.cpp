#include "hjbpod/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "hjbpod/error.hpp"
#include "hjbpod/text_io.hpp"

namespace hjbpod {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw ConfigError("key '" + key + "': '" + text + "' is not a number");
  }
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  int v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ConfigError("key '" + key + "': '" + text + "' is not an integer");
  return v;
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(to_double(key, item));
  return out;
}

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ", ";
    s += io::format(xs[i]);
  }
  return s;
}

}  // namespace

std::string shape_tag(ShapeKind kind) { return kind == ShapeKind::StokesSteady ? "stokes" : "ns"; }

void set_key(PipelineConfig& c, const std::string& key, const std::string& value) {
  if (key == "nx") c.nx = to_int(key, value);
  else if (key == "ny") c.ny = to_int(key, value);
  else if (key == "grid") c.nx = c.ny = to_int(key, value);
  else if (key == "nu") c.viscosity = to_double(key, value);
  else if (key == "lid_speed") c.lid_speed = to_double(key, value);
  else if (key == "alpha") c.alpha = to_double(key, value);
  else if (key == "lambda") c.discount = to_double(key, value);
  else if (key == "controls") c.controls = to_doubles(key, value);
  else if (key == "pod_rank") c.pod_rank = to_int(key, value);
  else if (key == "deim_rank") c.deim_rank = to_int(key, value);
  else if (key == "snapshot_horizon") c.snapshot_horizon = to_double(key, value);
  else if (key == "snapshot_count") c.snapshot_count = to_int(key, value);
  else if (key == "k") c.k = to_double(key, value);
  else if (key == "h") c.h = to_double(key, value);
  else if (key == "bounds") {
    if (value == "auto") c.bounds_mode = BoundsMode::Auto;
    else if (value == "explicit") c.bounds_mode = BoundsMode::Explicit;
    else throw ConfigError("key 'bounds': expected auto or explicit, got '" + value + "'");
  }
  else if (key == "bounds_factor") c.bounds_factor = to_double(key, value);
  else if (key == "lower") c.lower = to_doubles(key, value);
  else if (key == "upper") c.upper = to_doubles(key, value);
  else if (key == "dt") c.dt = to_double(key, value);
  else if (key == "horizon") c.horizon = to_double(key, value);
  else if (key == "report_times") c.report_times = to_doubles(key, value);
  else if (key == "shapes" || key == "shape") {
    c.shapes.clear();
    for (const auto& item : split_list(value)) c.shapes.push_back(shape_kind_from_string(item));
  }
  else if (key == "state_weight") c.state_weight = to_double(key, value);
  else if (key == "upwind_blend") c.upwind_blend = value == "auto" ? -1.0 : to_double(key, value);
  else if (key == "steady_tol") c.steady_tolerance = to_double(key, value);
  else if (key == "hjb_tol") c.hjb_tolerance = to_double(key, value);
  else if (key == "hjb_max_iters") c.hjb_max_iters = to_int(key, value);
  else if (key == "threads") c.threads = to_int(key, value);
  else if (key == "out") c.out = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

void validate(const PipelineConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(c.nx >= 4 && c.ny >= 4, "nx and ny must be >= 4");
  require(c.viscosity > 0.0, "nu must be > 0");
  require(c.alpha >= 0.0, "alpha must be >= 0");
  require(c.discount > 0.0, "lambda must be > 0");
  require(!c.controls.empty(), "controls must be nonempty");
  require(c.pod_rank >= 1, "pod_rank must be >= 1");
  require(c.deim_rank >= 1, "deim_rank must be >= 1");
  require(c.snapshot_horizon > 0.0, "snapshot_horizon must be > 0");
  require(c.snapshot_count >= 2, "snapshot_count must be >= 2");
  require(c.k > 0.0 && c.h > 0.0, "k and h must be > 0");
  require(c.discount * c.h < 1.0, "lambda*h must be < 1 (got " + io::format(c.discount * c.h) + ")");
  require(c.bounds_factor > 0.0, "bounds_factor must be > 0");
  if (c.bounds_mode == BoundsMode::Explicit) {
    require(c.lower.size() == static_cast<std::size_t>(c.pod_rank) && c.upper.size() == c.lower.size(),
            "explicit bounds need pod_rank entries in lower and upper");
  }
  require(c.dt > 0.0, "dt must be > 0");
  require(c.horizon > 0.0, "horizon must be > 0");
  for (double t : c.report_times) require(t >= 0.0 && t <= c.horizon + 1e-12, "report time " + io::format(t) + " outside [0, horizon]");
  require(!c.shapes.empty(), "shapes must be nonempty");
  require(c.state_weight > 0.0, "state_weight must be > 0");
  require(c.upwind_blend <= 1.0, "upwind_blend must be <= 1");
  require(c.steady_tolerance > 0.0 && c.hjb_tolerance > 0.0, "tolerances must be > 0");
  require(c.hjb_max_iters >= 1, "hjb_max_iters must be >= 1");
  require(c.threads >= 1, "threads must be >= 1");
  require(!c.out.empty(), "out must be nonempty");
}

PipelineConfig parse_config(const std::string& text, const std::string& source) {
  PipelineConfig c;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source + ":" + std::to_string(number) + ": expected key = value");
    try {
      set_key(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  validate(c);
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  return parse_config(text, path);
}

void apply_override(PipelineConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  set_key(c, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
  validate(c);
}

std::string config_to_text(const PipelineConfig& c, bool with_out) {
  std::ostringstream out;
  out << "nx = " << c.nx << "\nny = " << c.ny << "\nnu = " << io::format(c.viscosity)
      << "\nlid_speed = " << io::format(c.lid_speed) << "\nalpha = " << io::format(c.alpha)
      << "\nlambda = " << io::format(c.discount) << "\ncontrols = " << join(c.controls)
      << "\npod_rank = " << c.pod_rank << "\ndeim_rank = " << c.deim_rank
      << "\nsnapshot_horizon = " << io::format(c.snapshot_horizon) << "\nsnapshot_count = " << c.snapshot_count
      << "\nk = " << io::format(c.k) << "\nh = " << io::format(c.h)
      << "\nbounds = " << (c.bounds_mode == BoundsMode::Auto ? "auto" : "explicit")
      << "\nbounds_factor = " << io::format(c.bounds_factor);
  if (!c.lower.empty()) out << "\nlower = " << join(c.lower);
  if (!c.upper.empty()) out << "\nupper = " << join(c.upper);
  out << "\ndt = " << io::format(c.dt) << "\nhorizon = " << io::format(c.horizon)
      << "\nreport_times = " << join(c.report_times) << "\nshapes = ";
  for (std::size_t i = 0; i < c.shapes.size(); ++i) out << (i ? ", " : "") << shape_tag(c.shapes[i]);
  out << "\nstate_weight = " << io::format(c.state_weight)
      << "\nupwind_blend = " << (c.upwind_blend < 0.0 ? std::string("auto") : io::format(c.upwind_blend))
      << "\nsteady_tol = " << io::format(c.steady_tolerance) << "\nhjb_tol = " << io::format(c.hjb_tolerance)
      << "\nhjb_max_iters = " << c.hjb_max_iters << "\nthreads = " << c.threads << '\n';
  if (with_out) out << "out = " << c.out << '\n';
  return out.str();
}

}  // namespace hjbpod
