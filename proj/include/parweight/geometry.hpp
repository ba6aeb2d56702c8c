#pragma once

#include <string>
#include <utility>
#include <vector>

namespace parweight {

/// Exponent triple (p, q, gamma): p > 1 is the anisotropy exponent coupling
/// the time extent of a rectangle to the p-th power of its spatial side,
/// q > 1 the integrability index, gamma in [0,1) the time lag.
struct Exponents {
  double p;
  double q;
  double gamma;

  Exponents(double p_, double q_, double gamma_);

  /// Conjugate index q' = q/(q-1); satisfies (1-q')(1-q) = 1.
  double q_conjugate() const { return q / (q - 1.0); }
  /// Dual-weight exponent 1 - q'.
  double dual_exponent() const { return 1.0 - q_conjugate(); }
  /// Same (p, gamma) with another integrability index.
  Exponents with_q(double q_) const { return Exponents(p, q_, gamma); }
  /// Same (p, q) with another lag.
  Exponents with_gamma(double gamma_) const { return Exponents(p, q, gamma_); }
};

/// Axis-aligned box in R^{n+1}: a spatial box times an open time interval.
struct SpaceTimeBox {
  std::vector<double> spatial_lo;
  std::vector<double> spatial_hi;
  double time_lo = 0.0;
  double time_hi = 0.0;

  int dim() const { return static_cast<int>(spatial_lo.size()); }
  double time_extent() const { return time_hi - time_lo; }
  double volume() const;
  /// Containment with a symmetric tolerance relative to each axis extent.
  bool contains(const SpaceTimeBox& other, double rel_tol = 1e-9) const;
  bool contains_point(const std::vector<double>& x, double t,
                      double rel_tol = 1e-9) const;
};

/// E + s in the time coordinate only.
SpaceTimeBox translate_time(const SpaceTimeBox& box, double s);

/// Parabolic rectangle: the cube Q(x,l) times (t - l^p, t + l^p).
/// The lagged upper half R^+(gamma) is Q(x,l) x (t + gamma l^p, t + l^p),
/// and R^-(gamma) is its reflection across the center time level.
struct ParabolicRectangle {
  std::vector<double> center_x;
  double center_t = 0.0;
  double side = 0.0;

  SpaceTimeBox bounds(double p) const;
  SpaceTimeBox upper_half(double p, double gamma) const;
  SpaceTimeBox lower_half(double p, double gamma) const;
};

/// Returns (R^-(gamma), R^+(gamma)).
std::pair<SpaceTimeBox, SpaceTimeBox> lagged_halves(const ParabolicRectangle& rect,
                                                    double p, double gamma);

struct FamilyProvenance {
  double min_side = 0.0;
  int scale_count = 0;
  double stride_factor = 1.0;
  std::vector<double> scales;  // sides actually used, ascending
  std::string clipping = "clip-out";
};

/// Finite rectangle family; enumeration order is scale-major (ascending),
/// then time-major, then lexicographic in the spatial center.
struct RectangleFamily {
  std::vector<ParabolicRectangle> rectangles;
  FamilyProvenance provenance;

  std::size_t size() const { return rectangles.size(); }
};

}  // namespace parweight
