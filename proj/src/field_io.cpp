#include "hjbpod/field_io.hpp"

#include <sstream>

#include "hjbpod/error.hpp"
#include "hjbpod/text_io.hpp"

namespace hjbpod {

namespace {

LoadedField read_field(io::TokenReader& in) {
  in.expect_header("HJBPOD-FIELD");
  const long nx = in.integer();
  const long ny = in.integer();
  LoadedField f;
  try {
    f.grid = build_grid(static_cast<int>(nx), static_cast<int>(ny));
  } catch (const ConfigError& e) {
    throw FormatError(in.source() + ": " + e.what());
  }
  f.state.t = in.number();
  f.state.velocity = in.vector(f.grid.num_velocity());
  f.state.pressure = in.vector(f.grid.num_cells());
  if (!in.at_end()) throw FormatError(in.source() + ": trailing data after field");
  return f;
}

}  // namespace

std::string field_to_text(const CavityGrid& grid, const StaggeredState& state) {
  if (state.velocity.size() != grid.num_velocity() || state.pressure.size() != grid.num_cells()) {
    throw ConfigError("state does not match the grid");
  }
  std::ostringstream out;
  out << "HJBPOD-FIELD v1 " << grid.nx << ' ' << grid.ny << ' ' << io::format(state.t) << '\n';
  io::write_vector(out, state.velocity.head(grid.num_u()), grid.nx - 1);
  io::write_vector(out, state.velocity.tail(grid.num_v()), grid.nx);
  io::write_vector(out, state.pressure, grid.nx);
  return out.str();
}

void save_field(const std::string& path, const CavityGrid& grid, const StaggeredState& state) {
  io::write_file(path, field_to_text(grid, state));
}

LoadedField load_field(const std::string& path) {
  auto in = io::TokenReader::open(path);
  return read_field(in);
}

LoadedField field_from_text(const std::string& text, const std::string& source) {
  io::TokenReader in(text, source);
  return read_field(in);
}

}  // namespace hjbpod
