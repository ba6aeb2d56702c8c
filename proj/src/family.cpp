#include "parweight/family.hpp"

#include <cmath>

#include "parweight/error.hpp"

namespace parweight {

namespace {

long long side_cells(double len, double step) {
  long long c = std::llround(len / step);
  return c < 1 ? 1 : c;
}

}  // namespace

double min_admissible_side(const GridSpec& grid, const Exponents& exps,
                           double min_cells) {
  double hmax = 0.0;
  for (int a = 0; a < grid.n; ++a) hmax = std::max(hmax, grid.spatial_step(a));
  double ht = grid.time_step();
  double l = hmax;
  for (int j = 0; j < 64; ++j) {
    if ((1.0 - exps.gamma) * std::pow(l, exps.p) >= min_cells * ht * (1.0 - 1e-12))
      return l;
    l *= 2.0;
  }
  fail_data("family: no admissible rectangle side for this grid");
}

RectangleFamily enumerate_family(const GridSpec& grid, const Exponents& exps,
                                 const FamilyOptions& opt,
                                 const std::optional<SpaceTimeBox>& domain) {
  grid.validate();
  if (opt.scale_count < 1) fail_usage("family: scaleCount must be >= 1");
  if (!(opt.stride_factor > 0.0 && opt.stride_factor <= 1.0))
    fail_usage("family: strideFactor must lie in (0, 1]");

  const SpaceTimeBox& ambient = domain ? *domain : grid.domain;
  GridSpec::IndexBox region = grid.snap(ambient);
  if (!grid.index_box_inside(region) || region.empty())
    fail_data("family: enumeration domain leaves the grid");

  double min_side = opt.min_side > 0.0 ? opt.min_side : min_admissible_side(grid, exps);

  RectangleFamily family;
  family.provenance.min_side = min_side;
  family.provenance.scale_count = opt.scale_count;
  family.provenance.stride_factor = opt.stride_factor;

  const double ht = grid.time_step();

  for (int k = 0; k < opt.scale_count; ++k) {
    double l = min_side * std::pow(2.0, k);
    double lp = std::pow(l, exps.p);

    // Snapped dimensions: spatial side in cells per axis, time half-height.
    std::vector<long long> c(grid.n);
    bool fits = true;
    for (int a = 0; a < grid.n; ++a) {
      c[a] = side_cells(l, grid.spatial_step(a));
      if (c[a] > region.hi[a] - region.lo[a]) fits = false;
    }
    long long half_t = side_cells(lp, ht);
    // Lagged halves must cover at least one time cell after snapping.
    if ((1.0 - exps.gamma) * static_cast<double>(half_t) < 1.0 - 1e-9) fits = false;
    if (2 * half_t > region.t_hi - region.t_lo) fits = false;
    if (!fits) continue;  // scale clipped out entirely

    std::vector<long long> stride(grid.n);
    for (int a = 0; a < grid.n; ++a)
      stride[a] = std::max<long long>(1, std::llround(opt.stride_factor * c[a]));
    long long stride_t =
        std::max<long long>(1, std::llround(opt.stride_factor * static_cast<double>(half_t)));

    family.provenance.scales.push_back(l);

    // Low-edge lattices, time-major then lexicographic in space.
    for (long long jt = region.t_lo; jt + 2 * half_t <= region.t_hi; jt += stride_t) {
      std::vector<long long> lo(grid.n);
      for (int a = 0; a < grid.n; ++a) lo[a] = region.lo[a];
      bool done = false;
      while (!done) {
        ParabolicRectangle rect;
        rect.side = l;
        rect.center_x.resize(grid.n);
        for (int a = 0; a < grid.n; ++a)
          rect.center_x[a] = grid.domain.spatial_lo[a] +
                             (static_cast<double>(lo[a]) + 0.5 * static_cast<double>(c[a])) *
                                 grid.spatial_step(a);
        rect.center_t = grid.domain.time_lo + static_cast<double>(jt + half_t) * ht;
        family.rectangles.push_back(std::move(rect));

        int a = grid.n - 1;
        while (a >= 0) {
          lo[a] += stride[a];
          if (lo[a] + c[a] <= region.hi[a]) break;
          lo[a] = region.lo[a];
          --a;
        }
        if (a < 0) done = true;
      }
    }
  }

  if (family.rectangles.empty())
    fail_data("family: no rectangle of any requested scale fits the domain");
  return family;
}

FamilyOptions refined(const FamilyOptions& opt, const GridSpec& grid,
                      const Exponents& exps) {
  FamilyOptions out = opt;
  double floor_side = min_admissible_side(grid, exps);
  double base = opt.min_side > 0.0 ? opt.min_side : floor_side;
  if (base * 0.5 >= floor_side * (1.0 - 1e-12)) {
    out.min_side = base * 0.5;
    out.scale_count = opt.scale_count + 1;
  } else {
    out.min_side = base;
  }
  out.stride_factor = std::max(opt.stride_factor * 0.5, 1.0 / 1024.0);
  return out;
}

}  // namespace parweight
