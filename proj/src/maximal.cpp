#include "parweight/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parweight/error.hpp"
#include "parweight/family.hpp"
#include "parweight/parallel.hpp"

namespace parweight {

namespace {

struct HalfGeometry {
  // Index-space offsets of the snapped lagged half relative to the cell
  // (ix, it) at whose center the rectangle sits. Within one scale these
  // offsets are the same for every point, so they are precomputed once.
  std::vector<int> dx_lo, dx_hi;  // per spatial axis, relative to ix
  int dt_lo = 0, dt_hi = 0;       // relative to it
  double side = 0.0;
};

// Snapped half around a cell center: spatial edges at center +- l/2, time
// edges per direction. Cell centers sit at index + 0.5, so the offsets are
// computed once against a reference center and reused.
HalfGeometry make_half_geometry(const GridSpec& spec, const Exponents& exps,
                                double side, TimeDirection dir) {
  HalfGeometry g;
  g.side = side;
  g.dx_lo.resize(spec.n);
  g.dx_hi.resize(spec.n);
  for (int a = 0; a < spec.n; ++a) {
    double h = spec.spatial_step(a);
    double r = 0.5 * side / h;
    // Edges at (i + 0.5) -+ r; snap lo half-up, hi half-down.
    g.dx_lo[a] = static_cast<int>(std::floor(1.0 - r));   // floor(0.5 - r + 0.5)
    g.dx_hi[a] = static_cast<int>(std::ceil(r));          // ceil(0.5 + r - 0.5)
  }
  double ht = spec.time_step();
  double lp = std::pow(side, exps.p);
  double lo_t, hi_t;
  if (dir == TimeDirection::forward) {
    lo_t = exps.gamma * lp / ht;
    hi_t = lp / ht;
  } else {
    lo_t = -lp / ht;
    hi_t = -exps.gamma * lp / ht;
  }
  // Time edges at (j + 0.5) + lo_t and (j + 0.5) + hi_t.
  g.dt_lo = static_cast<int>(std::floor(1.0 + lo_t));  // floor(0.5 + lo_t + 0.5)
  g.dt_hi = static_cast<int>(std::ceil(hi_t));         // ceil(0.5 + hi_t - 0.5)
  return g;
}

bool admissible_at(const GridSpec& spec, const HalfGeometry& g,
                   const std::vector<int>& ix, int it) {
  for (int a = 0; a < spec.n; ++a) {
    if (ix[a] + g.dx_lo[a] < 0) return false;
    if (ix[a] + g.dx_hi[a] > spec.cells[a]) return false;
    if (g.dx_hi[a] <= g.dx_lo[a]) return false;
  }
  if (it + g.dt_lo < 0 || it + g.dt_hi > spec.time_cells) return false;
  return g.dt_hi > g.dt_lo;
}

GridSpec::IndexBox half_index_box(const HalfGeometry& g, const std::vector<int>& ix,
                                  int it) {
  GridSpec::IndexBox ib;
  ib.lo.resize(ix.size());
  ib.hi.resize(ix.size());
  for (std::size_t a = 0; a < ix.size(); ++a) {
    ib.lo[a] = ix[a] + g.dx_lo[a];
    ib.hi[a] = ix[a] + g.dx_hi[a];
  }
  ib.t_lo = it + g.dt_lo;
  ib.t_hi = it + g.dt_hi;
  return ib;
}

double direct_box_sum(const GridSpec& spec, const std::vector<double>& vals,
                      const GridSpec::IndexBox& ib) {
  double sum = 0.0;
  std::vector<int> ix(spec.n);
  for (int it = ib.t_lo; it < ib.t_hi; ++it) {
    for (int a = 0; a < spec.n; ++a) ix[a] = ib.lo[a];
    bool done = false;
    while (!done) {
      sum += vals[spec.flatten(ix, it)];
      int a = spec.n - 1;
      while (a >= 0) {
        if (++ix[a] < ib.hi[a]) break;
        ix[a] = ib.lo[a];
        --a;
      }
      if (a < 0) done = true;
    }
  }
  return sum;
}

MaximalResult maximal_impl(const GridFunction& f, const Exponents& exps,
                           const MaximalOptions& opt, TimeDirection dir) {
  if (opt.scales.empty()) fail_usage("maximal: empty scale list");
  const GridSpec& spec = f.spec();

  GridFunction absf = f.min_value() >= 0.0 ? f : f.map([](double v) { return std::abs(v); });

  std::vector<double> scales = opt.scales;
  std::sort(scales.begin(), scales.end());

  std::vector<HalfGeometry> geoms;
  geoms.reserve(scales.size());
  for (double l : scales) geoms.push_back(make_half_geometry(spec, exps, l, dir));

  const PrefixTable* table = opt.naive ? nullptr : &absf.prefix(1.0);
  const auto& vals = absf.values();

  std::size_t total = spec.total_cells();
  std::vector<double> out(total, 0.0);
  std::vector<double> arg(total, 0.0);
  std::vector<std::uint8_t> valid(total, 0);

  parallel_for(total, opt.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<int> ix(spec.n);
    int it;
    for (std::size_t idx = begin; idx < end; ++idx) {
      spec.unflatten(idx, ix, it);
      double best = -1.0;
      double best_scale = 0.0;
      for (const auto& g : geoms) {
        if (!admissible_at(spec, g, ix, it)) continue;
        GridSpec::IndexBox ib = half_index_box(g, ix, it);
        double sum = table ? table->box_sum(ib) : direct_box_sum(spec, vals, ib);
        double avg = sum / static_cast<double>(ib.count());
        if (avg > best) {
          best = avg;
          best_scale = g.side;
        }
      }
      if (best >= 0.0) {
        out[idx] = best;
        arg[idx] = best_scale;
        valid[idx] = 1;
      }
    }
  });

  MaximalResult res{GridFunction(spec, std::move(out)), std::move(valid),
                    std::move(arg), std::move(scales), 0};
  for (std::uint8_t v : res.valid) res.valid_count += v;
  if (res.valid_count == 0)
    fail_numeric("maximal: no admissible scale anywhere on the grid");
  return res;
}

}  // namespace

MaximalResult maximal_forward(const GridFunction& f, const Exponents& exps,
                              const MaximalOptions& opt) {
  return maximal_impl(f, exps, opt, TimeDirection::forward);
}

MaximalResult maximal_backward(const GridFunction& f, const Exponents& exps,
                               const MaximalOptions& opt) {
  return maximal_impl(f, exps, opt, TimeDirection::backward);
}

std::vector<std::uint8_t> admissibility_mask(const GridSpec& spec, const Exponents& exps,
                                             const std::vector<double>& scales,
                                             TimeDirection dir) {
  std::vector<HalfGeometry> geoms;
  geoms.reserve(scales.size());
  for (double l : scales) geoms.push_back(make_half_geometry(spec, exps, l, dir));
  std::vector<std::uint8_t> mask(spec.total_cells(), 0);
  std::vector<int> ix(spec.n);
  int it;
  for (std::size_t idx = 0; idx < mask.size(); ++idx) {
    spec.unflatten(idx, ix, it);
    for (const auto& g : geoms) {
      if (admissible_at(spec, g, ix, it)) {
        mask[idx] = 1;
        break;
      }
    }
  }
  return mask;
}

GridSpec::IndexBox mask_bounding_box(const GridSpec& spec,
                                     const std::vector<std::uint8_t>& mask) {
  GridSpec::IndexBox ib;
  ib.lo.assign(spec.n, std::numeric_limits<int>::max());
  ib.hi.assign(spec.n, std::numeric_limits<int>::min());
  ib.t_lo = std::numeric_limits<int>::max();
  ib.t_hi = std::numeric_limits<int>::min();
  std::vector<int> ix(spec.n);
  int it;
  std::size_t count = 0;
  for (std::size_t idx = 0; idx < mask.size(); ++idx) {
    if (!mask[idx]) continue;
    ++count;
    spec.unflatten(idx, ix, it);
    for (int a = 0; a < spec.n; ++a) {
      ib.lo[a] = std::min(ib.lo[a], ix[a]);
      ib.hi[a] = std::max(ib.hi[a], ix[a] + 1);
    }
    ib.t_lo = std::min(ib.t_lo, it);
    ib.t_hi = std::max(ib.t_hi, it + 1);
  }
  if (count == 0) fail_numeric("mask_bounding_box: empty validity mask");
  if (count != ib.count())
    fail_numeric("mask_bounding_box: validity region is not a full box");
  return ib;
}

std::vector<double> dyadic_scales(const GridSpec& grid, const Exponents& exps, int count) {
  if (count < 1) fail_usage("dyadic_scales: count must be >= 1");
  double l = min_admissible_side(grid, exps, 2.0);
  std::vector<double> scales;
  for (int k = 0; k < count; ++k) scales.push_back(l * std::pow(2.0, k));
  return scales;
}

}  // namespace parweight
