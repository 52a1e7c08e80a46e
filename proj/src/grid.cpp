#include "hjbpod/grid.hpp"

#include <string>

#include "hjbpod/error.hpp"

namespace hjbpod {

CavityGrid build_grid(int nx, int ny) {
  if (nx < 4 || ny < 4) {
    throw ConfigError("grid needs at least 4 cells per direction, got " + std::to_string(nx) + "x" +
                      std::to_string(ny));
  }
  return CavityGrid{nx, ny, 1.0 / nx, 1.0 / ny};
}

}  // namespace hjbpod
