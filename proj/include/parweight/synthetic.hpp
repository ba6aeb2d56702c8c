#pragma once

#include <cstdint>
#include <string>

#include "parweight/gridfn.hpp"

namespace parweight {

/// exp(sum of a few random low-frequency cosine modes); both the weight and
/// its reciprocal stay bounded, so every tested class constant is finite.
GridFunction log_smooth_random(const GridSpec& spec, std::uint64_t seed,
                               int modes = 4, double amplitude = 0.4);

/// iid uniform values in [lo, hi].
GridFunction rough_random(const GridSpec& spec, std::uint64_t seed, double lo,
                          double hi);

/// Indicator of the snapped sub-box (1 inside, `outside` elsewhere).
GridFunction indicator(const GridSpec& spec, const SpaceTimeBox& box,
                       double outside = 0.0);

/// Built-in generators by name: "one", "exp-t", "exp-neg-t", "log-smooth",
/// "rough", "indicator" (central half-box), "heat-kernel" (p = 2 kernel from
/// just below the domain).
GridFunction synthetic_grid(const std::string& name, const GridSpec& spec,
                            std::uint64_t seed);

}  // namespace parweight
