#pragma once

#include <cstdint>
#include <vector>

#include "parweight/geometry.hpp"
#include "parweight/gridfn.hpp"

namespace parweight {

/// forward = "+": integrates over R^+(gamma) (the future half);
/// backward = "-": integrates over R^-(gamma).
enum class TimeDirection { forward, backward };

struct MaximalOptions {
  std::vector<double> scales;  // rectangle sides, ascending preferred
  bool naive = false;          // direct-summation oracle path
  int threads = 0;             // 0: default_threads()
};

/// Pointwise supremum over admissible scales of the lagged half average of
/// |f|. A scale is admissible at a point when the snapped half lies inside
/// the domain and covers at least one cell; points with no admissible scale
/// are marked invalid and excluded from downstream suprema.
struct MaximalResult {
  GridFunction output;               // 0 where invalid
  std::vector<std::uint8_t> valid;
  std::vector<double> argmax_scale;  // 0 where invalid; smallest side on ties
  std::vector<double> scales;
  std::size_t valid_count = 0;
};

MaximalResult maximal_forward(const GridFunction& f, const Exponents& exps,
                              const MaximalOptions& opt);
MaximalResult maximal_backward(const GridFunction& f, const Exponents& exps,
                               const MaximalOptions& opt);

/// Admissibility mask alone (no averages): valid(z) iff some scale admits
/// the lagged half centered at z.
std::vector<std::uint8_t> admissibility_mask(const GridSpec& spec, const Exponents& exps,
                                             const std::vector<double>& scales,
                                             TimeDirection dir);

/// Bounding index box of the true cells of a mask; errors if the mask is
/// empty or not a full box (admissibility regions always are).
GridSpec::IndexBox mask_bounding_box(const GridSpec& spec,
                                     const std::vector<std::uint8_t>& mask);

/// Dyadic scale list l_min * 2^k, k < count, starting at the smallest
/// grid-admissible side.
std::vector<double> dyadic_scales(const GridSpec& grid, const Exponents& exps,
                                  int count);

}  // namespace parweight
