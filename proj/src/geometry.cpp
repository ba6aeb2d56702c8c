#include "parweight/geometry.hpp"

#include <cmath>

#include "parweight/error.hpp"

namespace parweight {

Exponents::Exponents(double p_, double q_, double gamma_) : p(p_), q(q_), gamma(gamma_) {
  if (!(p > 1.0)) fail_usage("exponent p must satisfy p > 1");
  if (!(q > 1.0)) fail_usage("exponent q must satisfy q > 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail_usage("lag gamma must lie in [0,1)");
}

double SpaceTimeBox::volume() const {
  double v = time_hi - time_lo;
  for (int a = 0; a < dim(); ++a) v *= spatial_hi[a] - spatial_lo[a];
  return v;
}

bool SpaceTimeBox::contains(const SpaceTimeBox& other, double rel_tol) const {
  if (other.dim() != dim()) return false;
  for (int a = 0; a < dim(); ++a) {
    double tol = rel_tol * (spatial_hi[a] - spatial_lo[a]);
    if (other.spatial_lo[a] < spatial_lo[a] - tol) return false;
    if (other.spatial_hi[a] > spatial_hi[a] + tol) return false;
  }
  double tol = rel_tol * (time_hi - time_lo);
  return other.time_lo >= time_lo - tol && other.time_hi <= time_hi + tol;
}

bool SpaceTimeBox::contains_point(const std::vector<double>& x, double t,
                                  double rel_tol) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  for (int a = 0; a < dim(); ++a) {
    double tol = rel_tol * (spatial_hi[a] - spatial_lo[a]);
    if (x[a] < spatial_lo[a] - tol || x[a] > spatial_hi[a] + tol) return false;
  }
  double tol = rel_tol * (time_hi - time_lo);
  return t >= time_lo - tol && t <= time_hi + tol;
}

SpaceTimeBox translate_time(const SpaceTimeBox& box, double s) {
  SpaceTimeBox out = box;
  out.time_lo += s;
  out.time_hi += s;
  return out;
}

SpaceTimeBox ParabolicRectangle::bounds(double p) const {
  SpaceTimeBox b;
  b.spatial_lo.resize(center_x.size());
  b.spatial_hi.resize(center_x.size());
  for (std::size_t a = 0; a < center_x.size(); ++a) {
    b.spatial_lo[a] = center_x[a] - 0.5 * side;
    b.spatial_hi[a] = center_x[a] + 0.5 * side;
  }
  double lp = std::pow(side, p);
  b.time_lo = center_t - lp;
  b.time_hi = center_t + lp;
  return b;
}

SpaceTimeBox ParabolicRectangle::upper_half(double p, double gamma) const {
  SpaceTimeBox b = bounds(p);
  double lp = std::pow(side, p);
  b.time_lo = center_t + gamma * lp;
  b.time_hi = center_t + lp;
  return b;
}

SpaceTimeBox ParabolicRectangle::lower_half(double p, double gamma) const {
  SpaceTimeBox b = bounds(p);
  double lp = std::pow(side, p);
  b.time_lo = center_t - lp;
  b.time_hi = center_t - gamma * lp;
  return b;
}

std::pair<SpaceTimeBox, SpaceTimeBox> lagged_halves(const ParabolicRectangle& rect,
                                                    double p, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) fail_usage("lagged_halves: gamma must lie in [0,1)");
  return {rect.lower_half(p, gamma), rect.upper_half(p, gamma)};
}

}  // namespace parweight
