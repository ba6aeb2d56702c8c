#pragma once

#include <optional>
#include <string>
#include <vector>

#include "parweight/factorize.hpp"
#include "parweight/geometry.hpp"
#include "parweight/gridfn.hpp"
#include "parweight/maximal.hpp"

namespace parweight {

struct PointMass {
  std::vector<double> x;
  double t = 0.0;
  double mass = 0.0;
};

/// Discrete nonnegative measure: point masses and/or an absolutely
/// continuous part given by a density grid.
struct MeasureSpec {
  std::vector<PointMass> points;
  std::optional<GridFunction> density;

  double total_mass(const GridSpec& grid) const;
  void validate(const GridSpec& grid) const;
};

struct MeasureMaximalOptions {
  std::vector<double> scales;
  /// Oracle path: point masses tested against the nominal (unsnapped)
  /// rectangle half with its nominal volume instead of being binned to cells.
  bool exact_points = false;
  int threads = 0;
};

/// Pointwise maximal function of the measure: sup over admissible scales of
/// m(R^-(gamma)) / |R^-(gamma)| for direction "-" (R^+ for "+"). Point
/// masses are binned to their containing cell unless exact_points is set.
MaskedGrid maximal_of_measure(const MeasureSpec& m, const GridSpec& grid,
                              const Exponents& exps, TimeDirection dir,
                              const MeasureMaximalOptions& opt);

struct CrWeightResult {
  GridFunction w;
  std::vector<std::uint8_t> valid;
  std::size_t clamped_cells = 0;  // zero maximal values raised to the floor
};

/// Coifman-Rochberg weight (M^{gamma-} mu)^delta, delta in [0,1).
CrWeightResult cr_weight(const MeasureSpec& m, double delta, const GridSpec& grid,
                         const Exponents& exps, const MeasureMaximalOptions& opt,
                         double floor_eps = 1e-12);

struct CrDecomposition {
  GridFunction K;        // on the valid sub-grid
  MeasureSpec mu;        // density w^{1+eps}
  double delta = 0.0;    // 1/(1+eps)
  double k_min = 0.0, k_max = 0.0;
  bool hypothesis_ok = true;  // false when max K / min K exceeds the bound
  GridSpec::IndexBox region;
};

/// Inverse construction w = K (M^{gamma-} mu)^delta with mu = w^{1+eps}.
CrDecomposition cr_decompose(const GridFunction& w, const Exponents& exps, double eps,
                             const MeasureMaximalOptions& opt,
                             double range_bound = 1e6);

/// f = -alpha log M^{gamma-} mu + beta log M^{gamma+} nu + b on the
/// intersection of the validity regions; both maximal functions must be
/// strictly positive there.
MaskedGrid cr_bmo(const MeasureSpec& mu, const MeasureSpec& nu, double alpha,
                  double beta, const GridFunction& b, const Exponents& exps,
                  const MeasureMaximalOptions& opt);

enum class SupersolutionKind { increasing_time, heat_kernel, product };

struct SupersolutionSpec {
  SupersolutionKind kind = SupersolutionKind::increasing_time;
  double rate = 1.0;               // increasing_time: v = e^{rate t}
  std::vector<double> source_x;    // heat_kernel origin
  double source_t = 0.0;
  std::vector<SupersolutionSpec> components;  // product
};

/// Samples a classical supersolution of the doubly nonlinear equation on the
/// grid. heat_kernel requires p = 2 and a domain starting at least 10 time
/// cells past the source time.
GridFunction supersolution(const SupersolutionSpec& spec, const GridSpec& grid,
                           const Exponents& exps);

/// Discrete weak-form pairing sum(|grad v|^{p-2} grad v . grad phi
/// - |v|^{p-2} v dphi/dt) * cellVolume with centered differences; test
/// functions phi are expected to vanish near the boundary.
double weak_form_pairing(const GridFunction& v, const GridFunction& phi, double p);

struct RepresentationOptions {
  MaximalOptions maximal;
  std::vector<double> eps_candidates{1.0, 0.5, 0.25, 0.125};
  double aq_threshold = 100.0;  // acceptance bound for the A_2 constant of v^eps
  double decompose_eps = 0.5;
  double tol = 1e-8;
  std::uint64_t seed = 1;
};

struct RepresentationResult {
  GridFunction b;   // on the common valid sub-grid
  MeasureSpec mu;   // forward factor measure, M^{gamma-}
  MeasureSpec nu;   // backward factor measure, M^{gamma+}
  double alpha = 0.0;
  double beta = 0.0;
  double eps = 0.0;          // exponent used for the weight bridge
  double residual = 0.0;     // reconstruction deviation (b is the quotient)
  double b_min = 0.0, b_max = 0.0;
  GridSpec::IndexBox region;
};

/// Pipeline realizing v = b (M^{gamma-} mu)^alpha / (M^{gamma+} nu)^beta:
/// weight bridge at a scanned eps, factorization at q = 2, then the inverse
/// Coifman-Rochberg construction on each factor. Stage failures propagate
/// with a stage tag in the error message.
RepresentationResult supersolution_representation(const GridFunction& v,
                                                  const Exponents& exps,
                                                  const RepresentationOptions& opt);

}  // namespace parweight
