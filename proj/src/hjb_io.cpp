#include <sstream>

#include "hjbpod/hjb.hpp"
#include "hjbpod/text_io.hpp"

namespace hjbpod {

namespace {

void write_geometry(std::ostream& out, std::string_view magic, const ValueGrid<double>& g) {
  out << magic << " v1 " << g.dim() << ' ' << io::format(g.spacing()) << ' ' << io::format(g.time_step()) << ' '
      << io::format(g.discount()) << '\n';
  for (int a = 0; a < g.dim(); ++a) out << io::format(g.lower()[a]) << ' ' << io::format(g.upper()[a]) << '\n';
}

ValueGrid<double> read_geometry(io::TokenReader& in, std::string_view magic) {
  in.expect_header(magic);
  const long l = in.integer();
  if (l < 1 || l > 16) throw FormatError(in.source() + ": invalid grid dimension");
  const double k = in.number();
  const double h = in.number();
  const double lambda = in.number();
  Eigen::VectorXd lo(l), hi(l);
  for (long a = 0; a < l; ++a) {
    lo[a] = in.number();
    hi[a] = in.number();
  }
  try {
    return ValueGrid<double>(lo, hi, k, h, lambda);
  } catch (const ConfigError& e) {
    throw FormatError(in.source() + ": " + e.what());
  }
}

}  // namespace

std::string value_grid_to_text(const ValueGrid<double>& grid) {
  std::ostringstream out;
  write_geometry(out, "HJBPOD-VALUE", grid);
  const auto& v = grid.values();
  io::write_vector(out, Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  return out.str();
}

ValueGrid<double> value_grid_from_text(const std::string& text, const std::string& source) {
  io::TokenReader in(text, source);
  ValueGrid<double> g = read_geometry(in, "HJBPOD-VALUE");
  for (double& v : g.values()) v = in.number();
  if (!in.at_end()) throw FormatError(source + ": trailing data after value grid");
  return g;
}

void save_value_grid(const std::string& path, const ValueGrid<double>& grid) {
  io::write_file(path, value_grid_to_text(grid));
}

ValueGrid<double> load_value_grid(const std::string& path) { return value_grid_from_text(io::read_file(path), path); }

std::string policy_to_text(const ValueGrid<double>& grid, const FeedbackPolicy& policy) {
  if (static_cast<std::int64_t>(policy.choice.size()) != grid.size()) throw ConfigError("policy does not match grid");
  std::ostringstream out;
  write_geometry(out, "HJBPOD-POLICY", grid);
  out << policy.controls.size();
  for (double u : policy.controls) out << ' ' << io::format(u);
  out << '\n';
  for (std::size_t i = 0; i < policy.choice.size(); ++i) {
    out << policy.choice[i] << ((i + 1) % 40 == 0 || i + 1 == policy.choice.size() ? '\n' : ' ');
  }
  return out.str();
}

LoadedPolicy policy_from_text(const std::string& text, const std::string& source) {
  io::TokenReader in(text, source);
  LoadedPolicy p{read_geometry(in, "HJBPOD-POLICY"), {}};
  const long nu = in.integer();
  if (nu < 1) throw FormatError(source + ": empty control set");
  for (long i = 0; i < nu; ++i) p.policy.controls.push_back(in.number());
  p.policy.choice.resize(static_cast<std::size_t>(p.grid.size()));
  for (int& c : p.policy.choice) {
    const long v = in.integer();
    if (v < 0 || v >= nu) throw FormatError(source + ": control index out of range");
    c = static_cast<int>(v);
  }
  if (!in.at_end()) throw FormatError(source + ": trailing data after policy");
  return p;
}

void save_policy(const std::string& path, const ValueGrid<double>& grid, const FeedbackPolicy& policy) {
  io::write_file(path, policy_to_text(grid, policy));
}

LoadedPolicy load_policy(const std::string& path) { return policy_from_text(io::read_file(path), path); }

}  // namespace hjbpod
