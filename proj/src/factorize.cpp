#include "parweight/factorize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "parweight/error.hpp"

namespace parweight {

namespace {

struct Workspace {
  GridFunction w_pow_pos;   // w^{1/q}
  GridFunction w_pow_neg;   // w^{-1/q}
  Exponents exps;
  MaximalOptions opt;
  std::vector<std::uint8_t> mask;
  GridSpec::IndexBox valid_box;
};

GridFunction apply_T(const Workspace& ws, const GridFunction& f) {
  const double qm1 = ws.exps.q - 1.0;
  GridFunction g1 = combine(power_transform(f, qm1), ws.w_pow_pos, CombineMode::product);
  MaximalResult m1 = maximal_backward(g1, ws.exps, ws.opt);
  GridFunction g2 = combine(f, ws.w_pow_neg, CombineMode::product);
  MaximalResult m2 = maximal_forward(g2, ws.exps, ws.opt);

  const auto& b1 = m1.output.values();
  const auto& b2 = m2.output.values();
  const auto& wp = ws.w_pow_pos.values();
  const auto& wn = ws.w_pow_neg.values();
  std::vector<double> out(b1.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!ws.mask[i]) continue;
    double term1 = std::pow(wn[i] * b1[i], 1.0 / qm1);
    double term2 = wp[i] * b2[i];
    out[i] = term1 + term2;
  }
  GridFunction res(f.spec(), std::move(out));
  return extend_from_box(res, ws.valid_box);
}

double max_on_mask(const GridFunction& f, const std::vector<std::uint8_t>& mask) {
  double m = -std::numeric_limits<double>::infinity();
  const auto& v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (mask[i]) m = std::max(m, v[i]);
  return m;
}

double min_on_mask(const GridFunction& f, const std::vector<std::uint8_t>& mask) {
  double m = std::numeric_limits<double>::infinity();
  const auto& v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (mask[i]) m = std::min(m, v[i]);
  return m;
}

double lq_norm_on_mask(const GridFunction& f, double q,
                       const std::vector<std::uint8_t>& mask, double cell_vol) {
  double s = 0.0;
  const auto& v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (mask[i]) s += std::pow(std::abs(v[i]), q) * cell_vol;
  return std::pow(s, 1.0 / q);
}

GridFunction random_probe(const GridSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.1, 1.0);
  std::vector<double> vals(spec.total_cells());
  for (double& v : vals) v = dist(rng);
  return GridFunction(spec, std::move(vals));
}

FactorizationResult factorize_high(const GridFunction& w, const Exponents& exps,
                                   const FactorizeOptions& opt);

}  // namespace

GridFunction extend_from_box(const GridFunction& f, const GridSpec::IndexBox& box) {
  const GridSpec& spec = f.spec();
  const auto& in = f.values();
  std::vector<double> out(in.size());
  std::vector<int> ix(spec.n);
  std::vector<int> cx(spec.n);
  int it;
  for (std::size_t idx = 0; idx < in.size(); ++idx) {
    spec.unflatten(idx, ix, it);
    bool inside = it >= box.t_lo && it < box.t_hi;
    for (int a = 0; a < spec.n && inside; ++a)
      inside = ix[a] >= box.lo[a] && ix[a] < box.hi[a];
    if (inside) {
      out[idx] = in[idx];
    } else {
      int ct = std::clamp(it, box.t_lo, box.t_hi - 1);
      for (int a = 0; a < spec.n; ++a) cx[a] = std::clamp(ix[a], box.lo[a], box.hi[a] - 1);
      out[idx] = in[spec.flatten(cx, ct)];
    }
  }
  return GridFunction(spec, std::move(out));
}

MaskedGrid rdf_operator(const GridFunction& f, const GridFunction& w,
                        const Exponents& exps, const MaximalOptions& opt) {
  if (!(exps.q >= 2.0))
    fail_usage("rdf_operator: requires q >= 2 (use factorize for 1 < q < 2)");
  if (!w.spec().same_layout(f.spec())) fail_data("rdf_operator: grid layout mismatch");
  if (!(w.min_value() > 0.0)) fail_data("rdf_operator: weight must be strictly positive");
  if (f.min_value() < 0.0) fail_data("rdf_operator: input must be nonnegative");

  Workspace ws{power_transform(w, 1.0 / exps.q), power_transform(w, -1.0 / exps.q),
               exps, opt, {}, {}};
  auto mf = admissibility_mask(f.spec(), exps, opt.scales, TimeDirection::forward);
  auto mb = admissibility_mask(f.spec(), exps, opt.scales, TimeDirection::backward);
  ws.mask.resize(mf.size());
  for (std::size_t i = 0; i < mf.size(); ++i) ws.mask[i] = mf[i] & mb[i];
  ws.valid_box = mask_bounding_box(f.spec(), ws.mask);

  GridFunction out = apply_T(ws, f);
  return MaskedGrid{std::move(out), std::move(ws.mask)};
}

namespace {

FactorizationResult factorize_high(const GridFunction& w, const Exponents& exps,
                                   const FactorizeOptions& opt) {
  const GridSpec& spec = w.spec();
  const double q = exps.q;
  const double cell_vol = spec.cell_volume();

  Workspace ws{power_transform(w, 1.0 / q), power_transform(w, -1.0 / q), exps,
               opt.maximal, {}, {}};
  auto mf = admissibility_mask(spec, exps, opt.maximal.scales, TimeDirection::forward);
  auto mb = admissibility_mask(spec, exps, opt.maximal.scales, TimeDirection::backward);
  ws.mask.resize(mf.size());
  std::size_t valid_count = 0;
  for (std::size_t i = 0; i < mf.size(); ++i) {
    ws.mask[i] = mf[i] & mb[i];
    valid_count += ws.mask[i];
  }
  if (valid_count == 0)
    fail_numeric("factorize: no point admits both maximal operators");
  ws.valid_box = mask_bounding_box(spec, ws.mask);

  GridFunction f0 = opt.f0 ? *opt.f0
                           : GridFunction::constant(
                                 spec, std::pow(spec.domain.volume(), -1.0 / q));
  if (f0.min_value() <= 0.0) fail_data("factorize: f0 must be strictly positive");

  // Operator-norm surrogate: max Lq ratio over a probe battery, doubled.
  std::mt19937_64 rng(opt.seed);
  double b0 = 0.0;
  {
    std::vector<GridFunction> probes{f0};
    for (int k = 0; k < 4; ++k) probes.push_back(random_probe(spec, rng));
    for (const auto& probe : probes) {
      GridFunction tf = apply_T(ws, probe);
      double ratio = lq_norm_on_mask(tf, q, ws.mask, cell_vol) /
                     lq_norm_on_mask(probe, q, ws.mask, cell_vol);
      if (!std::isfinite(ratio)) fail_numeric("factorize: probe ratio overflowed");
      b0 = std::max(b0, ratio);
    }
    b0 *= 2.0;
  }

  FactorizationResult res{GridFunction::constant(spec, 1.0),
                          GridFunction::constant(spec, 1.0),
                          GridFunction::constant(spec, 1.0),
                          ws.mask,
                          true,
                          0.0,
                          0,
                          0,
                          0.0,
                          {},
                          0.0,
                          0.0,
                          0.0};

  GridFunction last_term = f0;  // term t_N at exit
  double B = b0;
  for (int restart = 0;; ++restart) {
    if (restart > 8) fail_numeric("factorize: series diverged after 8 restarts of B");
    res.restarts = restart;
    res.B = B;
    res.term_maxima.clear();

    bool diverged = false;
    std::vector<double> phi_vals(spec.total_cells(), 0.0);
    GridFunction t = apply_T(ws, f0).map([B](double v) { return v / (2.0 * B); });
    int grow_streak = 0;
    double prev_max = std::numeric_limits<double>::infinity();
    int n_terms = 0;
    while (true) {
      ++n_terms;
      const auto& tv = t.values();
      for (std::size_t i = 0; i < phi_vals.size(); ++i) phi_vals[i] += tv[i];
      double tmax = max_on_mask(t, ws.mask);
      res.term_maxima.push_back(tmax);

      double phi_min = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < phi_vals.size(); ++i)
        if (ws.mask[i]) phi_min = std::min(phi_min, phi_vals[i]);

      if (tmax < opt.tol * phi_min) {
        last_term = t;
        break;
      }
      if (tmax > prev_max && ++grow_streak >= 3) {
        diverged = true;
        break;
      }
      if (tmax <= prev_max) grow_streak = 0;
      prev_max = tmax;
      if (n_terms >= opt.max_terms) {
        diverged = true;  // too slow: enlarge B to sharpen the geometric decay
        break;
      }
      t = apply_T(ws, t).map([B](double v) { return v / (2.0 * B); });
    }
    if (diverged) {
      B *= 2.0;
      continue;
    }
    res.terms = n_terms;
    res.phi = GridFunction(spec, std::move(phi_vals));
    break;
  }

  res.u = combine(ws.w_pow_pos, power_transform(res.phi, q - 1.0), CombineMode::product);
  res.v = combine(ws.w_pow_neg, res.phi, CombineMode::product);

  // Residual of the algebraic identity u v^{1-q} = w.
  {
    GridFunction recon = combine(res.u, power_transform(res.v, 1.0 - q), CombineMode::product);
    const auto& rv = recon.values();
    const auto& wv = w.values();
    double worst = 0.0;
    for (std::size_t i = 0; i < rv.size(); ++i)
      worst = std::max(worst, std::abs(rv[i] - wv[i]) / wv[i]);
    res.residual = worst;
  }

  // Fixed-point margin: T phi <= 2B phi + T t_N pointwise on the mask.
  {
    GridFunction t_phi = apply_T(ws, res.phi);
    GridFunction t_last = apply_T(ws, last_term);
    double margin = std::numeric_limits<double>::infinity();
    const auto& a = t_phi.values();
    const auto& b = t_last.values();
    const auto& c = res.phi.values();
    for (std::size_t i = 0; i < a.size(); ++i)
      if (ws.mask[i]) margin = std::min(margin, b[i] + 2.0 * res.B * c[i] - a[i]);
    res.fixed_point_margin = margin;
  }

  // Measured A_1 constants of the factors on the valid box, with a scale
  // list sized to the cropped region.
  {
    GridFunction u_crop = crop(res.u, ws.valid_box);
    GridFunction v_crop = crop(res.v, ws.valid_box);
    MaximalOptions a1_opt = opt.maximal;
    a1_opt.scales = dyadic_scales(u_crop.spec(), exps, 3);
    res.a1_u = a1_constant(u_crop, exps, TimeDirection::forward, a1_opt).constant;
    res.a1_v = a1_constant(v_crop, exps, TimeDirection::backward, a1_opt).constant;
  }
  return res;
}

}  // namespace

FactorizationResult factorize(const GridFunction& w, const Exponents& exps,
                              const FactorizeOptions& opt) {
  if (!(w.min_value() > 0.0)) fail_data("factorize: weight must be strictly positive");
  if (exps.q >= 2.0) return factorize_high(w, exps, opt);

  // 1 < q < 2: factorize sigma = w^{1-q'} at q' >= 2 with time reversed,
  // then map back: w = sigma^{1-q} = rev(v') * rev(u')^{1-q}.
  Exponents dual(exps.p, exps.q_conjugate(), exps.gamma);
  GridFunction sigma_rev = reverse_time(power_transform(w, exps.dual_exponent()));
  FactorizeOptions dual_opt = opt;
  if (opt.f0) dual_opt.f0 = reverse_time(*opt.f0);
  FactorizationResult inner = factorize_high(sigma_rev, dual, dual_opt);

  FactorizationResult res = inner;
  res.u = reverse_time(inner.v);
  res.v = reverse_time(inner.u);
  res.phi = reverse_time(inner.phi);
  {
    std::vector<std::uint8_t> mask(inner.valid.size());
    const GridSpec& spec = w.spec();
    std::size_t slice = spec.spatial_cells();
    for (int it = 0; it < spec.time_cells; ++it)
      for (std::size_t s = 0; s < slice; ++s)
        mask[static_cast<std::size_t>(it) * slice + s] =
            inner.valid[static_cast<std::size_t>(spec.time_cells - 1 - it) * slice + s];
    res.valid = std::move(mask);
  }

  GridFunction recon = combine(res.u, power_transform(res.v, 1.0 - exps.q),
                               CombineMode::product);
  const auto& rv = recon.values();
  const auto& wv = w.values();
  double worst = 0.0;
  for (std::size_t i = 0; i < rv.size(); ++i)
    worst = std::max(worst, std::abs(rv[i] - wv[i]) / wv[i]);
  res.residual = worst;

  GridSpec::IndexBox box = mask_bounding_box(w.spec(), res.valid);
  GridFunction u_crop = crop(res.u, box);
  GridFunction v_crop = crop(res.v, box);
  MaximalOptions a1_opt = opt.maximal;
  a1_opt.scales = dyadic_scales(u_crop.spec(), exps, 3);
  res.a1_u = a1_constant(u_crop, exps, TimeDirection::forward, a1_opt).constant;
  res.a1_v = a1_constant(v_crop, exps, TimeDirection::backward, a1_opt).constant;
  return res;
}

WeightReport product_synthesis_check(const GridFunction& u, const GridFunction& v,
                                     const Exponents& exps, double delta,
                                     const RectangleFamily& family) {
  if (!(delta > 0.0 && delta < 1.0))
    fail_usage("product_synthesis_check: delta must lie in (0,1)");
  if (!(exps.gamma < delta * std::pow(2.0, 1.0 - exps.p)))
    fail_usage("product_synthesis_check: requires gamma < delta 2^{1-p}");
  GridFunction w = combine(u, power_transform(v, 1.0 - exps.q), CombineMode::product);
  return aq_constant(w, exps.with_gamma(delta), TimeDirection::forward, family);
}

}  // namespace parweight
