#pragma once

#include <optional>
#include <vector>

#include "parweight/family.hpp"
#include "parweight/geometry.hpp"
#include "parweight/gridfn.hpp"
#include "parweight/maximal.hpp"

namespace parweight {

/// Estimated weight-class constant together with the witness attaining it.
struct WeightReport {
  double constant = 0.0;
  std::optional<ParabolicRectangle> witness_rect;
  std::optional<std::size_t> witness_cell;  // flat index, for pointwise suprema
  double p = 0.0, q = 0.0, gamma = 0.0;
  TimeDirection direction = TimeDirection::forward;
  FamilyProvenance provenance;
};

/// Per-rectangle product: for direction "+",
///   (avg_{R^-(gamma)} w) * (avg_{R^+(gamma)} w^{1-q'})^{q-1},
/// with the halves swapped for direction "-".
double aq_product(const GridFunction& w, const Exponents& exps, TimeDirection dir,
                  const ParabolicRectangle& rect);

/// Supremum of aq_product over the family, with the maximizing rectangle.
WeightReport aq_constant(const GridFunction& w, const Exponents& exps,
                         TimeDirection dir, const RectangleFamily& family);

/// A_1 constant: for direction "+" the supremum over valid grid points of
/// M^{gamma-}w(z) / w(z) (forward maximal for direction "-").
WeightReport a1_constant(const GridFunction& w, const Exponents& exps,
                         TimeDirection dir, const MaximalOptions& opt);

/// max over the family of avg_{R^-(2^{p-1} gamma)} w / inf_{R^+(2^{p-1} gamma)} w.
/// Requires gamma < 2^{1-p}.
double a1_forward_comparison(const GridFunction& w, const Exponents& exps,
                             const RectangleFamily& family);

/// Reverse Hoelder functional at lag 0:
///   (avg_{R^-(0)} w^{1+delta})^{1/(1+delta)} / avg_{R^+(0)} w.
double reverse_holder_ratio(const GridFunction& w, const Exponents& exps,
                            double delta, const ParabolicRectangle& rect);
WeightReport reverse_holder(const GridFunction& w, const Exponents& exps,
                            double delta, const RectangleFamily& family);

struct SelfImprovementRow {
  double index;     // q - eps
  double constant;
};
struct SelfImprovementScan {
  std::vector<SelfImprovementRow> rows;
  std::optional<double> smallest_finite_index;
  double threshold;
};

/// aq_constant at each q - eps over the family; reports the smallest tested
/// index whose constant stays below the threshold.
SelfImprovementScan self_improvement_scan(const GridFunction& w, const Exponents& exps,
                                          const RectangleFamily& family,
                                          const std::vector<double>& eps_grid,
                                          double threshold = 1e6);

/// max over lambda of lambda^q * w({M^{gamma+} f > lambda} cap valid) /
/// integral |f|^q w. Empty lambda grid selects a 32-point geometric grid
/// spanning the maximal output's range on the valid region.
double weak_type_ratio(const GridFunction& w, const GridFunction& f,
                       const Exponents& exps, const MaximalOptions& opt,
                       const std::vector<double>& lambda_grid = {});

/// (integral over the valid region of (M^{gamma+} f)^q w / integral |f|^q w)^{1/q}.
double strong_type_ratio(const GridFunction& w, const GridFunction& f,
                         const Exponents& exps, const MaximalOptions& opt);

/// sigma = w^{1-q'}.
GridFunction dual_weight(const GridFunction& w, const Exponents& exps);

}  // namespace parweight
