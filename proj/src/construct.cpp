#include "parweight/construct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parweight/bmo.hpp"
#include "parweight/error.hpp"
#include "parweight/parallel.hpp"
#include "parweight/weights.hpp"

namespace parweight {

namespace {

SpaceTimeBox half_at(const std::vector<double>& x, double t, double side,
                     const Exponents& exps, TimeDirection dir) {
  ParabolicRectangle rect{x, t, side};
  return dir == TimeDirection::forward ? rect.upper_half(exps.p, exps.gamma)
                                       : rect.lower_half(exps.p, exps.gamma);
}

}  // namespace

double MeasureSpec::total_mass(const GridSpec& grid) const {
  double total = 0.0;
  for (const auto& pm : points) total += pm.mass;
  if (density) total += integral(*density);
  (void)grid;
  return total;
}

void MeasureSpec::validate(const GridSpec& grid) const {
  for (const auto& pm : points) {
    if (!(pm.mass > 0.0)) fail_data("measure: point masses must be positive");
    if (static_cast<int>(pm.x.size()) != grid.n)
      fail_data("measure: point dimension mismatch");
    if (!grid.domain.contains_point(pm.x, pm.t))
      fail_data("measure: point mass outside the grid domain");
  }
  if (density) {
    if (!density->spec().same_layout(grid)) fail_data("measure: density grid mismatch");
    if (density->min_value() < 0.0) fail_data("measure: density must be nonnegative");
  }
  if (!(total_mass(grid) > 0.0)) fail_data("measure: total mass must be positive");
}

MaskedGrid maximal_of_measure(const MeasureSpec& m, const GridSpec& grid,
                              const Exponents& exps, TimeDirection dir,
                              const MeasureMaximalOptions& opt) {
  grid.validate();
  m.validate(grid);
  if (opt.scales.empty()) fail_usage("maximal_of_measure: empty scale list");

  // Point masses binned to their containing cell (grid path).
  std::optional<GridFunction> mass_grid;
  if (!m.points.empty() && !opt.exact_points) {
    std::vector<double> mass(grid.total_cells(), 0.0);
    std::vector<int> ix(grid.n);
    for (const auto& pm : m.points) {
      for (int a = 0; a < grid.n; ++a) {
        int i = static_cast<int>(std::floor((pm.x[a] - grid.domain.spatial_lo[a]) /
                                            grid.spatial_step(a)));
        ix[a] = std::clamp(i, 0, grid.cells[a] - 1);
      }
      int it = static_cast<int>(
          std::floor((pm.t - grid.domain.time_lo) / grid.time_step()));
      it = std::clamp(it, 0, grid.time_cells - 1);
      mass[grid.flatten(ix, it)] += pm.mass;
    }
    mass_grid = GridFunction(grid, std::move(mass));
    mass_grid->prefix(1.0);
  }
  if (m.density) m.density->prefix(1.0);

  std::vector<double> scales = opt.scales;
  std::sort(scales.begin(), scales.end());
  const double cell_vol = grid.cell_volume();

  std::size_t total = grid.total_cells();
  std::vector<double> out(total, 0.0);
  std::vector<std::uint8_t> valid(total, 0);

  parallel_for(total, opt.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<int> ix(grid.n);
    std::vector<double> x(grid.n);
    int it;
    for (std::size_t idx = begin; idx < end; ++idx) {
      grid.unflatten(idx, ix, it);
      for (int a = 0; a < grid.n; ++a) x[a] = grid.center(a, ix[a]);
      double t = grid.time_center(it);
      double best = -1.0;
      for (double side : scales) {
        SpaceTimeBox half = half_at(x, t, side, exps, dir);
        double mass_sum = 0.0;
        double volume;
        if (opt.exact_points) {
          if (!grid.domain.contains(half)) continue;
          for (const auto& pm : m.points)
            if (half.contains_point(pm.x, pm.t, 0.0)) mass_sum += pm.mass;
          volume = half.volume();
          if (m.density) {
            GridSpec::IndexBox ib = grid.snap(half);
            if (!grid.index_box_inside(ib) || ib.empty()) continue;
            mass_sum += m.density->prefix(1.0).box_sum(ib) * cell_vol;
          }
        } else {
          GridSpec::IndexBox ib = grid.snap(half);
          if (!grid.index_box_inside(ib) || ib.empty()) continue;
          if (mass_grid) mass_sum += mass_grid->prefix(1.0).box_sum(ib);
          if (m.density) mass_sum += m.density->prefix(1.0).box_sum(ib) * cell_vol;
          volume = static_cast<double>(ib.count()) * cell_vol;
        }
        double ratio = mass_sum / volume;
        if (ratio > best) best = ratio;
      }
      if (best >= 0.0) {
        out[idx] = best;
        valid[idx] = 1;
      }
    }
  });

  std::size_t valid_count = 0;
  for (auto v : valid) valid_count += v;
  if (valid_count == 0)
    fail_numeric("maximal_of_measure: no admissible scale anywhere");
  return MaskedGrid{GridFunction(grid, std::move(out)), std::move(valid)};
}

CrWeightResult cr_weight(const MeasureSpec& m, double delta, const GridSpec& grid,
                         const Exponents& exps, const MeasureMaximalOptions& opt,
                         double floor_eps) {
  if (!(delta >= 0.0 && delta < 1.0)) fail_usage("cr_weight: delta must lie in [0,1)");
  MaskedGrid mm = maximal_of_measure(m, grid, exps, TimeDirection::backward, opt);
  const auto& mv = mm.values.values();
  std::vector<double> out(mv.size(), floor_eps);
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < mv.size(); ++i) {
    if (!mm.valid[i]) continue;
    double v = delta == 0.0 ? 1.0 : std::pow(mv[i], delta);
    if (v < floor_eps) {
      v = floor_eps;
      ++clamped;
    }
    out[i] = v;
  }
  return CrWeightResult{GridFunction(grid, std::move(out)), std::move(mm.valid), clamped};
}

CrDecomposition cr_decompose(const GridFunction& w, const Exponents& exps, double eps,
                             const MeasureMaximalOptions& opt, double range_bound) {
  if (!(eps > 0.0)) fail_usage("cr_decompose: eps must be positive");
  if (!(w.min_value() > 0.0)) fail_data("cr_decompose: weight must be strictly positive");

  MeasureSpec mu;
  mu.density = power_transform(w, 1.0 + eps);
  double delta = 1.0 / (1.0 + eps);

  MaskedGrid mm = maximal_of_measure(mu, w.spec(), exps, TimeDirection::backward, opt);
  GridSpec::IndexBox region = mask_bounding_box(w.spec(), mm.valid);

  GridFunction m_crop = crop(mm.values, region);
  GridFunction w_crop = crop(w, region);
  GridFunction k = combine(w_crop, power_transform(m_crop, delta), CombineMode::quotient,
                           1e-300);

  CrDecomposition out{std::move(k), std::move(mu), delta, 0.0, 0.0, true, region};
  out.k_min = out.K.min_value();
  out.k_max = out.K.max_value();
  out.hypothesis_ok = out.k_max <= range_bound * out.k_min;
  return out;
}

MaskedGrid cr_bmo(const MeasureSpec& mu, const MeasureSpec& nu, double alpha,
                  double beta, const GridFunction& b, const Exponents& exps,
                  const MeasureMaximalOptions& opt) {
  if (!(alpha >= 0.0 && beta >= 0.0)) fail_usage("cr_bmo: alpha, beta must be >= 0");
  const GridSpec& grid = b.spec();
  MaskedGrid mm = maximal_of_measure(mu, grid, exps, TimeDirection::backward, opt);
  MaskedGrid mn = maximal_of_measure(nu, grid, exps, TimeDirection::forward, opt);

  const auto& mv = mm.values.values();
  const auto& nv = mn.values.values();
  const auto& bv = b.values();
  std::vector<std::uint8_t> mask(mv.size(), 0);
  std::vector<double> out(mv.size(), 0.0);
  for (std::size_t i = 0; i < mv.size(); ++i) {
    if (!mm.valid[i] || !mn.valid[i]) continue;
    if (alpha > 0.0 && !(mv[i] > 0.0)) continue;
    if (beta > 0.0 && !(nv[i] > 0.0)) continue;
    mask[i] = 1;
    double val = bv[i];
    if (alpha > 0.0) val -= alpha * std::log(mv[i]);
    if (beta > 0.0) val += beta * std::log(nv[i]);
    out[i] = val;
  }
  std::size_t count = 0;
  for (auto v : mask) count += v;
  if (count == 0) fail_numeric("cr_bmo: maximal functions vanish on the valid region");
  return MaskedGrid{GridFunction(grid, std::move(out)), std::move(mask)};
}

GridFunction supersolution(const SupersolutionSpec& spec, const GridSpec& grid,
                           const Exponents& exps) {
  switch (spec.kind) {
    case SupersolutionKind::increasing_time: {
      if (!(spec.rate > 0.0)) fail_usage("supersolution: rate must be positive");
      double rate = spec.rate;
      return GridFunction::sample(
          grid, [rate](const std::vector<double>&, double t) { return std::exp(rate * t); });
    }
    case SupersolutionKind::heat_kernel: {
      if (std::abs(exps.p - 2.0) > 1e-12)
        fail_usage("supersolution: heat kernel requires p = 2");
      if (static_cast<int>(spec.source_x.size()) != grid.n)
        fail_usage("supersolution: heat kernel source dimension mismatch");
      double margin = 10.0 * grid.time_step();
      if (!(grid.domain.time_lo >= spec.source_t + margin))
        fail_data("supersolution: domain must start at least 10 time cells past the source");
      const std::vector<double> x0 = spec.source_x;
      const double t0 = spec.source_t;
      const int n = grid.n;
      const double pi = std::acos(-1.0);
      return GridFunction::sample(grid, [x0, t0, n, pi](const std::vector<double>& x, double t) {
        double tau = t - t0;
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) r2 += (x[a] - x0[a]) * (x[a] - x0[a]);
        return std::pow(4.0 * pi * tau, -0.5 * n) * std::exp(-r2 / (4.0 * tau));
      });
    }
    case SupersolutionKind::product: {
      if (spec.components.empty())
        fail_usage("supersolution: product requires at least one component");
      GridFunction out = supersolution(spec.components[0], grid, exps);
      for (std::size_t i = 1; i < spec.components.size(); ++i)
        out = combine(out, supersolution(spec.components[i], grid, exps),
                      CombineMode::product);
      return out;
    }
  }
  fail_usage("supersolution: unknown kind");
}

double weak_form_pairing(const GridFunction& v, const GridFunction& phi, double p) {
  if (!v.spec().same_layout(phi.spec())) fail_data("weak_form_pairing: grid mismatch");
  const GridSpec& spec = v.spec();
  const auto& vv = v.values();
  const auto& pv = phi.values();

  auto diff = [&](const std::vector<double>& vals, const std::vector<int>& ix, int it,
                  int axis) {
    // Centered difference, one-sided at the boundary. axis == -1 is time.
    std::vector<int> lo = ix, hi = ix;
    int it_lo = it, it_hi = it;
    double h;
    if (axis < 0) {
      h = spec.time_step();
      it_lo = std::max(it - 1, 0);
      it_hi = std::min(it + 1, spec.time_cells - 1);
    } else {
      h = spec.spatial_step(axis);
      lo[axis] = std::max(ix[axis] - 1, 0);
      hi[axis] = std::min(ix[axis] + 1, spec.cells[axis] - 1);
    }
    int steps = (axis < 0) ? it_hi - it_lo : hi[axis] - lo[axis];
    if (steps == 0) return 0.0;
    return (vals[spec.flatten(hi, it_hi)] - vals[spec.flatten(lo, it_lo)]) /
           (static_cast<double>(steps) * h);
  };

  double sum = 0.0;
  std::vector<int> ix(spec.n);
  int it;
  std::vector<double> grad_v(spec.n), grad_phi(spec.n);
  for (std::size_t idx = 0; idx < vv.size(); ++idx) {
    spec.unflatten(idx, ix, it);
    double g2 = 0.0;
    for (int a = 0; a < spec.n; ++a) {
      grad_v[a] = diff(vv, ix, it, a);
      grad_phi[a] = diff(pv, ix, it, a);
      g2 += grad_v[a] * grad_v[a];
    }
    double gnorm = std::sqrt(g2);
    double flux = 0.0;
    if (gnorm > 0.0) {
      double coef = std::pow(gnorm, p - 2.0);
      for (int a = 0; a < spec.n; ++a) flux += coef * grad_v[a] * grad_phi[a];
    }
    double vval = vv[idx];
    double power = std::pow(std::abs(vval), p - 2.0) * vval;
    sum += flux - power * diff(pv, ix, it, -1);
  }
  return sum * spec.cell_volume();
}

RepresentationResult supersolution_representation(const GridFunction& v,
                                                  const Exponents& exps,
                                                  const RepresentationOptions& opt) {
  if (!(v.min_value() > 0.0))
    fail_data("representation: input must be strictly positive");
  Exponents e2(exps.p, 2.0, exps.gamma);

  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const Error& err) {
      throw Error(err.kind(), std::string("representation stage ") + name + ": " +
                                  err.what());
    }
  };

  // Weight bridge: largest candidate eps whose A_2^+ constant stays moderate.
  GridFunction u = stage("log", [&] { return weight_to_bmo(v, 1.0); });
  double eps = 0.0;
  std::optional<GridFunction> w;
  stage("weight", [&] {
    RectangleFamily family = enumerate_family(v.spec(), e2, FamilyOptions{3, 0.5, 0.0});
    for (double cand : opt.eps_candidates) {
      GridFunction wc = bmo_to_weight(u, cand);
      WeightReport rep = aq_constant(wc, e2, TimeDirection::forward, family);
      if (rep.constant <= opt.aq_threshold) {
        eps = cand;
        w = std::move(wc);
        return 0;
      }
    }
    fail_numeric("no candidate eps gives a moderate A_2 constant");
  });

  FactorizeOptions fopt;
  fopt.maximal = opt.maximal;
  fopt.tol = opt.tol;
  fopt.seed = opt.seed;
  FactorizationResult fr = stage("factorize", [&] { return factorize(*w, e2, fopt); });

  MeasureMaximalOptions mopt;
  mopt.scales = opt.maximal.scales;
  CrDecomposition du = stage("decompose+", [&] {
    return cr_decompose(fr.u, e2, opt.decompose_eps, mopt);
  });
  CrDecomposition dv_rev = stage("decompose-", [&] {
    return cr_decompose(reverse_time(fr.v), e2, opt.decompose_eps, mopt);
  });

  double alpha = du.delta / eps;
  double beta = dv_rev.delta / eps;

  return stage("assemble", [&] {
    MaskedGrid m_mu =
        maximal_of_measure(du.mu, v.spec(), e2, TimeDirection::backward, mopt);
    MeasureSpec nu;
    nu.density = reverse_time(*dv_rev.mu.density);
    MaskedGrid m_nu =
        maximal_of_measure(nu, v.spec(), e2, TimeDirection::forward, mopt);

    std::vector<std::uint8_t> mask(m_mu.valid.size());
    for (std::size_t i = 0; i < mask.size(); ++i) {
      bool ok = m_mu.valid[i] && m_nu.valid[i] && m_mu.values.value(i) > 0.0 &&
                m_nu.values.value(i) > 0.0;
      mask[i] = ok ? 1 : 0;
    }
    GridSpec::IndexBox region = mask_bounding_box(v.spec(), mask);

    GridFunction mu_pow = power_transform(crop(m_mu.values, region), alpha);
    GridFunction nu_pow = power_transform(crop(m_nu.values, region), beta);
    GridFunction v_crop = crop(v, region);
    GridFunction b = combine(combine(v_crop, nu_pow, CombineMode::product), mu_pow,
                             CombineMode::quotient, 1e-300);

    GridFunction recon =
        combine(combine(b, mu_pow, CombineMode::product), nu_pow, CombineMode::quotient,
                1e-300);
    double residual = 0.0;
    const auto& rv = recon.values();
    const auto& vv = v_crop.values();
    for (std::size_t i = 0; i < rv.size(); ++i)
      residual = std::max(residual, std::abs(rv[i] - vv[i]) / vv[i]);

    RepresentationResult out{std::move(b), du.mu,      std::move(nu), alpha, beta,
                             eps,          residual,   0.0,           0.0,   region};
    out.b_min = out.b.min_value();
    out.b_max = out.b.max_value();
    return out;
  });
}

}  // namespace parweight
