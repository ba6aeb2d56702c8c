#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "parweight/geometry.hpp"
#include "parweight/gridfn.hpp"
#include "parweight/maximal.hpp"
#include "parweight/weights.hpp"

namespace parweight {

struct MaskedGrid {
  GridFunction values;
  std::vector<std::uint8_t> valid;
};

/// Sublinear operator driving the factorization series (q >= 2):
///   T f = (w^{-1/q} M^{gamma-}(f^{q-1} w^{1/q}))^{1/(q-1)} + w^{1/q} M^{gamma+}(f w^{-1/q}).
/// Defined on the intersection of the two maximal operators' validity masks.
MaskedGrid rdf_operator(const GridFunction& f, const GridFunction& w,
                        const Exponents& exps, const MaximalOptions& opt);

struct FactorizeOptions {
  MaximalOptions maximal;
  double tol = 1e-8;       // stop when a term's max falls below tol * min(phi)
  int max_terms = 400;
  std::uint64_t seed = 1;  // probe battery for the operator-norm surrogate
  std::optional<GridFunction> f0;  // default: constant with unit L^q norm
};

struct FactorizationResult {
  GridFunction u, v, phi;             // extended to the full grid
  std::vector<std::uint8_t> valid;    // intersection mask the series ran on
  bool extended = false;              // values outside the mask are nearest-valid copies
  double B = 0.0;                     // operator-norm surrogate actually used
  int terms = 0;
  int restarts = 0;
  double residual = 0.0;              // max relative deviation of u v^{1-q} from w
  std::vector<double> term_maxima;    // convergence trace
  /// min over the mask of (T t_N + 2B phi - T phi); the series construction
  /// makes T phi <= 2B phi + T t_N pointwise, so this stays >= -fp noise.
  double fixed_point_margin = 0.0;
  double a1_u = 0.0;  // measured A_1^+ constant of u on the valid box
  double a1_v = 0.0;  // measured A_1^- constant of v on the valid box
};

/// Constructive factorization w = u v^{1-q} with u in A_1^+(gamma) and
/// v in A_1^-(gamma): phi = sum_{i>=1} (2B)^{-i} T^i f0, u = w^{1/q} phi^{q-1},
/// v = w^{-1/q} phi. For 1 < q < 2 the dual weight sigma = w^{1-q'} is
/// factorized at q' >= 2 with time reversed and mapped back.
FactorizationResult factorize(const GridFunction& w, const Exponents& exps,
                              const FactorizeOptions& opt);

/// aq_constant of u v^{1-q} at lag delta; requires gamma < delta 2^{1-p}.
WeightReport product_synthesis_check(const GridFunction& u, const GridFunction& v,
                                     const Exponents& exps, double delta,
                                     const RectangleFamily& family);

/// Fills cells outside the valid index box with the value at the nearest
/// valid cell (per-axis index clamp).
GridFunction extend_from_box(const GridFunction& f, const GridSpec::IndexBox& box);

}  // namespace parweight
