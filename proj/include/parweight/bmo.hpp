#pragma once

#include <vector>

#include "parweight/family.hpp"
#include "parweight/geometry.hpp"
#include "parweight/gridfn.hpp"

namespace parweight {

/// Two-sided oscillation functional of u on one rectangle:
///   J_R(a) = avg_{R^+(gamma)} (u - a)^+ + avg_{R^-(gamma)} (a - u)^+.
/// Convex and piecewise linear in a; the exact minimizer is a weighted
/// quantile of the merged cell values.
double pbmo_objective(const GridFunction& u, const Exponents& exps,
                      const ParabolicRectangle& rect, double a);
double pbmo_optimal_offset(const GridFunction& u, const Exponents& exps,
                           const ParabolicRectangle& rect);

struct BmoReport {
  double seminorm = 0.0;
  std::vector<double> offsets;  // optimal a_R per rectangle, family order
  ParabolicRectangle witness;
  std::size_t witness_index = 0;
  double gamma = 0.0;
  FamilyProvenance provenance;
};

/// max over the family of min over a of J_R(a).
BmoReport pbmo_seminorm(const GridFunction& u, const Exponents& exps,
                        const RectangleFamily& family);

/// Least-squares exponential fit of the level-set decay
///   |R^{+/-}(gamma) cap {oscillation > lambda}| ~= A e^{-B lambda} |R|,
/// returning the weaker (smaller B) of the two sides.
struct JnFit {
  double A = 0.0;
  double B = 0.0;
  double fit_quality = 0.0;  // coefficient of determination on log measures
  int points_used = 0;
  bool degenerate = false;  // level sets empty at every positive level
  char side = '+';
};

/// Empty lambda_grid selects 16 linear points from 0 to the 99th percentile
/// of (u - a)^+ on R^+(gamma). Fewer than 4 positive-measure points on both
/// sides refuses the fit (numeric error) unless the decay is degenerate-exact.
JnFit jn_decay_fit(const GridFunction& u, const Exponents& exps,
                   const ParabolicRectangle& rect, double a,
                   const std::vector<double>& lambda_grid = {});

/// w = e^{-eps u}; range-checked against overflow.
GridFunction bmo_to_weight(const GridFunction& u, double eps);

/// -scale * log w.
GridFunction weight_to_bmo(const GridFunction& w, double scale);

}  // namespace parweight
