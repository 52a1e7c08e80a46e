#pragma once

#include <string>

#include "hjbpod/grid.hpp"
#include "hjbpod/navier_stokes.hpp"

namespace hjbpod {

// HJBPOD-FIELD v1 nx ny t, then u faces, v faces and cell pressures.
std::string field_to_text(const CavityGrid& grid, const StaggeredState& state);
void save_field(const std::string& path, const CavityGrid& grid, const StaggeredState& state);

struct LoadedField {
  CavityGrid grid;
  StaggeredState state;
};
LoadedField load_field(const std::string& path);
LoadedField field_from_text(const std::string& text, const std::string& source = "<memory>");

}  // namespace hjbpod
