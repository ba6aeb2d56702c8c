#include "parweight/bmo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "parweight/error.hpp"
#include "parweight/parallel.hpp"

namespace parweight {

namespace {

void collect_half(const GridFunction& u, const SpaceTimeBox& half, const char* who,
                  std::vector<double>& out) {
  const GridSpec& spec = u.spec();
  GridSpec::IndexBox ib = spec.snap(half);
  if (!spec.index_box_inside(ib))
    fail_data(std::string(who) + ": rectangle half leaves the grid domain");
  if (ib.empty()) fail_data(std::string(who) + ": rectangle half snapped empty");
  out.clear();
  out.reserve(ib.count());
  const auto& vals = u.values();
  std::vector<int> ix(spec.n);
  for (int it = ib.t_lo; it < ib.t_hi; ++it) {
    for (int a = 0; a < spec.n; ++a) ix[a] = ib.lo[a];
    bool done = false;
    while (!done) {
      out.push_back(vals[spec.flatten(ix, it)]);
      int a = spec.n - 1;
      while (a >= 0) {
        if (++ix[a] < ib.hi[a]) break;
        ix[a] = ib.lo[a];
        --a;
      }
      if (a < 0) done = true;
    }
  }
}

double objective_from_samples(const std::vector<double>& future,
                              const std::vector<double>& past, double a) {
  double plus = 0.0;
  for (double v : future)
    if (v > a) plus += v - a;
  double minus = 0.0;
  for (double v : past)
    if (v < a) minus += a - v;
  return plus / static_cast<double>(future.size()) +
         minus / static_cast<double>(past.size());
}

// First breakpoint where the right derivative of J becomes nonnegative.
// J'(a) = -|{future > a}|/m_f + |{past < a}|/m_p between breakpoints.
double optimal_offset_from_samples(const std::vector<double>& future,
                                   const std::vector<double>& past) {
  struct Jump {
    double value;
    double slope;
  };
  std::vector<Jump> jumps;
  jumps.reserve(future.size() + past.size());
  double wf = 1.0 / static_cast<double>(future.size());
  double wp = 1.0 / static_cast<double>(past.size());
  for (double v : future) jumps.push_back({v, wf});
  for (double v : past) jumps.push_back({v, wp});
  std::sort(jumps.begin(), jumps.end(),
            [](const Jump& x, const Jump& y) { return x.value < y.value; });
  double g = -1.0;  // J'(-inf)
  std::size_t i = 0;
  while (i < jumps.size()) {
    double v = jumps[i].value;
    while (i < jumps.size() && jumps[i].value == v) {
      g += jumps[i].slope;
      ++i;
    }
    if (g >= 0.0) return v;
  }
  return jumps.back().value;
}

struct RectObjective {
  double value;
  double offset;
};

RectObjective solve_rect(const GridFunction& u, const Exponents& exps,
                         const ParabolicRectangle& rect) {
  auto [lower, upper] = lagged_halves(rect, exps.p, exps.gamma);
  std::vector<double> future, past;
  collect_half(u, upper, "pbmo", future);
  collect_half(u, lower, "pbmo", past);
  double a = optimal_offset_from_samples(future, past);
  return {objective_from_samples(future, past, a), a};
}

}  // namespace

double pbmo_objective(const GridFunction& u, const Exponents& exps,
                      const ParabolicRectangle& rect, double a) {
  auto [lower, upper] = lagged_halves(rect, exps.p, exps.gamma);
  std::vector<double> future, past;
  collect_half(u, upper, "pbmo_objective", future);
  collect_half(u, lower, "pbmo_objective", past);
  return objective_from_samples(future, past, a);
}

double pbmo_optimal_offset(const GridFunction& u, const Exponents& exps,
                           const ParabolicRectangle& rect) {
  auto [lower, upper] = lagged_halves(rect, exps.p, exps.gamma);
  std::vector<double> future, past;
  collect_half(u, upper, "pbmo_optimal_offset", future);
  collect_half(u, lower, "pbmo_optimal_offset", past);
  return optimal_offset_from_samples(future, past);
}

BmoReport pbmo_seminorm(const GridFunction& u, const Exponents& exps,
                        const RectangleFamily& family) {
  if (family.rectangles.empty()) fail_data("pbmo_seminorm: empty rectangle family");
  std::size_t count = family.rectangles.size();
  std::vector<double> objectives(count);
  std::vector<double> offsets(count);
  parallel_for(count, 0, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RectObjective r = solve_rect(u, exps, family.rectangles[i]);
      objectives[i] = r.value;
      offsets[i] = r.offset;
    }
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < count; ++i)
    if (objectives[i] > objectives[best]) best = i;

  BmoReport rep;
  rep.seminorm = objectives[best];
  rep.offsets = std::move(offsets);
  rep.witness = family.rectangles[best];
  rep.witness_index = best;
  rep.gamma = exps.gamma;
  rep.provenance = family.provenance;
  return rep;
}

namespace {

struct SideFit {
  bool usable = false;
  bool empty = true;  // no positive-measure level at any positive lambda
  double A = 0.0, B = 0.0, r2 = 0.0;
  int points = 0;
};

SideFit fit_side(const std::vector<double>& oscillation, double rect_volume,
                 double cell_volume, const std::vector<double>& lambdas) {
  SideFit fit;
  std::vector<double> xs, ys;
  for (double lambda : lambdas) {
    std::size_t cnt = 0;
    for (double v : oscillation)
      if (v > lambda) ++cnt;
    if (cnt == 0) continue;
    if (lambda > 0.0) fit.empty = false;
    xs.push_back(lambda);
    ys.push_back(std::log(static_cast<double>(cnt) * cell_volume / rect_volume));
  }
  fit.points = static_cast<int>(xs.size());
  if (fit.points < 4) return fit;

  // Least squares y = log A - B x.
  double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double det = n * sxx - sx * sx;
  if (det <= 0.0) return fit;
  double slope = (n * sxy - sx * sy) / det;
  double intercept = (sy - slope * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  double ymean = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double pred = intercept + slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
  }
  fit.usable = true;
  fit.A = std::exp(intercept);
  fit.B = -slope;
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

double percentile(std::vector<double> v, double frac) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t idx = static_cast<std::size_t>(frac * static_cast<double>(v.size() - 1));
  return v[idx];
}

}  // namespace

JnFit jn_decay_fit(const GridFunction& u, const Exponents& exps,
                   const ParabolicRectangle& rect, double a,
                   const std::vector<double>& lambda_grid) {
  auto [lower, upper] = lagged_halves(rect, exps.p, exps.gamma);
  std::vector<double> future, past;
  collect_half(u, upper, "jn_decay_fit", future);
  collect_half(u, lower, "jn_decay_fit", past);

  std::vector<double> plus(future.size()), minus(past.size());
  for (std::size_t i = 0; i < future.size(); ++i) plus[i] = std::max(future[i] - a, 0.0);
  for (std::size_t i = 0; i < past.size(); ++i) minus[i] = std::max(a - past[i], 0.0);

  const GridSpec& spec = u.spec();
  GridSpec::IndexBox full = spec.snap(rect.bounds(exps.p));
  double rect_volume = static_cast<double>(full.count()) * spec.cell_volume();
  double cell_volume = spec.cell_volume();

  std::vector<double> lambdas = lambda_grid;
  if (lambdas.empty()) {
    double top = percentile(plus, 0.99);
    if (top <= 0.0) top = percentile(minus, 0.99);
    const int count = 16;
    for (int k = 0; k < count; ++k)
      lambdas.push_back(top * static_cast<double>(k) / (count - 1));
  }

  SideFit fp = fit_side(plus, rect_volume, cell_volume, lambdas);
  SideFit fm = fit_side(minus, rect_volume, cell_volume, lambdas);

  if (fp.empty && fm.empty && !fp.usable && !fm.usable) {
    JnFit out;  // oscillation vanishes at every positive level
    out.degenerate = true;
    out.B = std::numeric_limits<double>::infinity();
    out.fit_quality = 1.0;
    return out;
  }
  if (!fp.usable && !fm.usable)
    fail_numeric("jn_decay_fit: fewer than 4 positive-measure levels on both sides");

  const SideFit* chosen;
  char side;
  if (fp.usable && fm.usable) {
    chosen = fp.B <= fm.B ? &fp : &fm;
    side = fp.B <= fm.B ? '+' : '-';
  } else if (fp.usable) {
    chosen = &fp;
    side = '+';
  } else {
    chosen = &fm;
    side = '-';
  }
  JnFit out;
  out.A = chosen->A;
  out.B = chosen->B;
  out.fit_quality = chosen->r2;
  out.points_used = chosen->points;
  out.side = side;
  return out;
}

GridFunction bmo_to_weight(const GridFunction& u, double eps) {
  double extent = std::max(std::abs(u.min_value()), std::abs(u.max_value()));
  if (eps * extent > 700.0)
    fail_numeric("bmo_to_weight: exp(-eps u) would overflow the double range");
  return u.map([eps](double v) { return std::exp(-eps * v); });
}

GridFunction weight_to_bmo(const GridFunction& w, double scale) {
  if (!(w.min_value() > 0.0)) fail_data("weight_to_bmo: weight must be strictly positive");
  return w.map([scale](double v) { return -scale * std::log(v); });
}

}  // namespace parweight
