#pragma once

#include <string>

#include "parweight/gridfn.hpp"

namespace parweight {

/// CSV grid format. Header line:
///   n,cellsPerAxis...,timeCells,spatialLo...,spatialHi...,timeLo,timeHi
/// then one line per time cell with the spatial values in row-major order.
/// Values are written with 17 significant digits, so a write/read round trip
/// is bit-exact.
void write_grid_csv(const std::string& path, const GridFunction& f);
GridFunction read_grid_csv(const std::string& path);

}  // namespace parweight
