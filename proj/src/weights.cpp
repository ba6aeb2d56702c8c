#include "parweight/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "parweight/error.hpp"
#include "parweight/parallel.hpp"

namespace parweight {

namespace {

struct BestRect {
  double value = -std::numeric_limits<double>::infinity();
  std::size_t index = 0;
};

// Deterministic parallel argmax over the family: chunk leaders compared by
// (value desc, index asc), so the result is independent of thread count.
template <class Fn>
BestRect family_argmax(std::size_t count, int threads, Fn&& per_rect) {
  std::vector<BestRect> leaders;
  std::mutex m;
  parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
    BestRect local;
    for (std::size_t i = begin; i < end; ++i) {
      double v = per_rect(i);
      if (v > local.value || (v == local.value && i < local.index)) {
        local.value = v;
        local.index = i;
      }
    }
    std::lock_guard<std::mutex> lock(m);
    leaders.push_back(local);
  });
  BestRect best;
  for (const auto& l : leaders)
    if (l.value > best.value || (l.value == best.value && l.index < best.index)) best = l;
  return best;
}

void require_positive_weight(const GridFunction& w, const char* who) {
  if (!(w.min_value() > 0.0)) fail_data(std::string(who) + ": weight must be strictly positive");
}

double min_over_box(const GridFunction& f, const GridSpec::IndexBox& ib) {
  const GridSpec& spec = f.spec();
  const auto& vals = f.values();
  double mn = std::numeric_limits<double>::infinity();
  std::vector<int> ix(spec.n);
  for (int it = ib.t_lo; it < ib.t_hi; ++it) {
    for (int a = 0; a < spec.n; ++a) ix[a] = ib.lo[a];
    bool done = false;
    while (!done) {
      mn = std::min(mn, vals[spec.flatten(ix, it)]);
      int a = spec.n - 1;
      while (a >= 0) {
        if (++ix[a] < ib.hi[a]) break;
        ix[a] = ib.lo[a];
        --a;
      }
      if (a < 0) done = true;
    }
  }
  return mn;
}

}  // namespace

double aq_product(const GridFunction& w, const Exponents& exps, TimeDirection dir,
                  const ParabolicRectangle& rect) {
  auto [lower, upper] = lagged_halves(rect, exps.p, exps.gamma);
  const SpaceTimeBox& past = dir == TimeDirection::forward ? lower : upper;
  const SpaceTimeBox& future = dir == TimeDirection::forward ? upper : lower;
  double avg_w = box_average(w, past, 1.0);
  double avg_dual = box_average(w, future, exps.dual_exponent());
  return avg_w * std::pow(avg_dual, exps.q - 1.0);
}

WeightReport aq_constant(const GridFunction& w, const Exponents& exps,
                         TimeDirection dir, const RectangleFamily& family) {
  require_positive_weight(w, "aq_constant");
  if (family.rectangles.empty()) fail_data("aq_constant: empty rectangle family");
  // Build both tables up front so worker threads only read.
  w.prefix(1.0);
  w.prefix(exps.dual_exponent());
  BestRect best = family_argmax(family.rectangles.size(), 0, [&](std::size_t i) {
    return aq_product(w, exps, dir, family.rectangles[i]);
  });
  WeightReport rep;
  rep.constant = best.value;
  rep.witness_rect = family.rectangles[best.index];
  rep.p = exps.p;
  rep.q = exps.q;
  rep.gamma = exps.gamma;
  rep.direction = dir;
  rep.provenance = family.provenance;
  return rep;
}

WeightReport a1_constant(const GridFunction& w, const Exponents& exps,
                         TimeDirection dir, const MaximalOptions& opt) {
  require_positive_weight(w, "a1_constant");
  MaximalResult m = dir == TimeDirection::forward ? maximal_backward(w, exps, opt)
                                                  : maximal_forward(w, exps, opt);
  const auto& mv = m.output.values();
  const auto& wv = w.values();
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;
  for (std::size_t i = 0; i < mv.size(); ++i) {
    if (!m.valid[i]) continue;
    double r = mv[i] / wv[i];
    if (r > best) {
      best = r;
      best_idx = i;
    }
  }
  WeightReport rep;
  rep.constant = best;
  rep.witness_cell = best_idx;
  rep.p = exps.p;
  rep.q = exps.q;
  rep.gamma = exps.gamma;
  rep.direction = dir;
  rep.provenance.scales = m.scales;
  rep.provenance.scale_count = static_cast<int>(m.scales.size());
  return rep;
}

double a1_forward_comparison(const GridFunction& w, const Exponents& exps,
                             const RectangleFamily& family) {
  require_positive_weight(w, "a1_forward_comparison");
  double blowup = std::pow(2.0, exps.p - 1.0) * exps.gamma;
  if (!(blowup < 1.0))
    fail_usage("a1_forward_comparison: requires gamma < 2^{1-p}");
  const GridSpec& spec = w.spec();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& rect : family.rectangles) {
    auto [lower, upper] = lagged_halves(rect, exps.p, blowup);
    double avg_past = box_average(w, lower, 1.0);
    GridSpec::IndexBox ib = spec.snap(upper);
    if (!spec.index_box_inside(ib) || ib.empty())
      fail_data("a1_forward_comparison: lagged half leaves the grid");
    double inf_future = min_over_box(w, ib);
    best = std::max(best, avg_past / inf_future);
  }
  return best;
}

double reverse_holder_ratio(const GridFunction& w, const Exponents& exps,
                            double delta, const ParabolicRectangle& rect) {
  auto [lower, upper] = lagged_halves(rect, exps.p, 0.0);
  double num = box_average(w, lower, 1.0 + delta);
  if (!std::isfinite(num)) fail_numeric("reverse_holder: w^{1+delta} overflowed");
  return std::pow(num, 1.0 / (1.0 + delta)) / box_average(w, upper, 1.0);
}

WeightReport reverse_holder(const GridFunction& w, const Exponents& exps,
                            double delta, const RectangleFamily& family) {
  require_positive_weight(w, "reverse_holder");
  if (!(delta > 0.0)) fail_usage("reverse_holder: delta must be positive");
  if (family.rectangles.empty()) fail_data("reverse_holder: empty rectangle family");
  w.prefix(1.0);
  w.prefix(1.0 + delta);
  BestRect best = family_argmax(family.rectangles.size(), 0, [&](std::size_t i) {
    return reverse_holder_ratio(w, exps, delta, family.rectangles[i]);
  });
  WeightReport rep;
  rep.constant = best.value;
  rep.witness_rect = family.rectangles[best.index];
  rep.p = exps.p;
  rep.q = exps.q;
  rep.gamma = exps.gamma;
  rep.direction = TimeDirection::forward;
  rep.provenance = family.provenance;
  return rep;
}

SelfImprovementScan self_improvement_scan(const GridFunction& w, const Exponents& exps,
                                          const RectangleFamily& family,
                                          const std::vector<double>& eps_grid,
                                          double threshold) {
  SelfImprovementScan scan;
  scan.threshold = threshold;
  std::vector<double> indices{exps.q};
  for (double eps : eps_grid) {
    if (!(eps > 0.0)) fail_usage("self_improvement_scan: eps must be positive");
    if (exps.q - eps <= 1.0) continue;  // indices must stay above 1
    indices.push_back(exps.q - eps);
  }
  std::sort(indices.begin(), indices.end());
  for (double idx : indices) {
    WeightReport rep = aq_constant(w, exps.with_q(idx), TimeDirection::forward, family);
    scan.rows.push_back({idx, rep.constant});
    if (rep.constant <= threshold &&
        (!scan.smallest_finite_index || idx < *scan.smallest_finite_index))
      scan.smallest_finite_index = idx;
  }
  return scan;
}

double weak_type_ratio(const GridFunction& w, const GridFunction& f,
                       const Exponents& exps, const MaximalOptions& opt,
                       const std::vector<double>& lambda_grid) {
  require_positive_weight(w, "weak_type_ratio");
  if (!w.spec().same_layout(f.spec())) fail_data("weak_type_ratio: grid layout mismatch");

  MaximalResult m = maximal_forward(f, exps, opt);
  const auto& mv = m.output.values();
  const auto& wv = w.values();
  const double cell_vol = f.spec().cell_volume();

  double mmin = std::numeric_limits<double>::infinity();
  double mmax = 0.0;
  for (std::size_t i = 0; i < mv.size(); ++i) {
    if (!m.valid[i]) continue;
    mmin = std::min(mmin, mv[i]);
    mmax = std::max(mmax, mv[i]);
  }

  double denom = integral(f, exps.q, &w);

  std::vector<double> lambdas = lambda_grid;
  if (lambdas.empty()) {
    if (mmax <= 0.0) return 0.0;  // empty level sets at every positive level
    double lo = mmin > 0.0 ? mmin : mmax * 1e-6;
    lo = std::min(lo, mmax);
    const int count = 32;
    double ratio = std::pow(mmax / lo, 1.0 / (count - 1));
    for (int k = 0; k < count; ++k) lambdas.push_back(lo * std::pow(ratio, k) * (1.0 - 1e-12));
  }

  double best = 0.0;
  bool any_mass = false;
  for (double lambda : lambdas) {
    double measure = 0.0;
    for (std::size_t i = 0; i < mv.size(); ++i)
      if (m.valid[i] && mv[i] > lambda) measure += wv[i] * cell_vol;
    if (measure > 0.0) any_mass = true;
    if (measure > 0.0 && denom <= 0.0)
      fail_numeric("weak_type_ratio: zero denominator with nonempty level sets");
    if (denom > 0.0)
      best = std::max(best, std::pow(lambda, exps.q) * measure / denom);
  }
  if (!any_mass) return 0.0;
  return best;
}

double strong_type_ratio(const GridFunction& w, const GridFunction& f,
                         const Exponents& exps, const MaximalOptions& opt) {
  require_positive_weight(w, "strong_type_ratio");
  if (!w.spec().same_layout(f.spec())) fail_data("strong_type_ratio: grid layout mismatch");
  MaximalResult m = maximal_forward(f, exps, opt);
  const auto& mv = m.output.values();
  const auto& wv = w.values();
  const double cell_vol = f.spec().cell_volume();
  double num = 0.0;
  for (std::size_t i = 0; i < mv.size(); ++i)
    if (m.valid[i]) num += std::pow(mv[i], exps.q) * wv[i] * cell_vol;
  double denom = integral(f, exps.q, &w);
  if (denom <= 0.0) {
    if (num <= 0.0) return 0.0;
    fail_numeric("strong_type_ratio: zero denominator");
  }
  return std::pow(num / denom, 1.0 / exps.q);
}

GridFunction dual_weight(const GridFunction& w, const Exponents& exps) {
  require_positive_weight(w, "dual_weight");
  return power_transform(w, exps.dual_exponent());
}

}  // namespace parweight
