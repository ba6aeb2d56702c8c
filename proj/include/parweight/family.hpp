#pragma once

#include <optional>

#include "parweight/geometry.hpp"
#include "parweight/gridfn.hpp"

namespace parweight {

struct FamilyOptions {
  int scale_count = 3;
  double stride_factor = 1.0;  // in (0, 1]
  /// Smallest side; 0 selects the smallest grid-admissible dyadic side
  /// (a power-of-two multiple of the coarsest spatial step whose lagged
  /// halves snap to at least one time cell).
  double min_side = 0.0;
};

/// Enumerates parabolic rectangles with dyadic sides l = min_side * 2^k,
/// k < scale_count, centers on a lattice with spatial stride
/// stride_factor * l and time stride stride_factor * l^p, keeping only
/// rectangles whose full R lies inside `domain` (grid domain by default).
/// Scales that cannot fit anywhere are skipped; an entirely empty family is
/// an error, not an empty success.
RectangleFamily enumerate_family(const GridSpec& grid, const Exponents& exps,
                                 const FamilyOptions& opt,
                                 const std::optional<SpaceTimeBox>& domain = {});

/// One refinement step: halves min_side (not below the grid floor), halves
/// the stride and adds one scale, so the refined family contains the
/// original one and family suprema are monotone under refinement.
FamilyOptions refined(const FamilyOptions& opt, const GridSpec& grid,
                      const Exponents& exps);

/// Smallest dyadic side whose lagged halves span at least min_cells time
/// cells. Families (edge-aligned rectangles) need one cell; pointwise
/// maximal operators evaluate at cell centers, where the tie-shrinking snap
/// can cost a cell, and need two.
double min_admissible_side(const GridSpec& grid, const Exponents& exps,
                           double min_cells = 1.0);

}  // namespace parweight
