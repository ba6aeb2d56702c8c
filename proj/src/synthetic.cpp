#include "parweight/synthetic.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "parweight/error.hpp"

namespace parweight {

GridFunction log_smooth_random(const GridSpec& spec, std::uint64_t seed, int modes,
                               double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(0.3 * amplitude, amplitude);
  std::uniform_int_distribution<int> freq(1, 3);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::acos(-1.0));

  struct Mode {
    double a;
    std::vector<double> xi;
    double eta;
    double theta;
  };
  std::vector<Mode> field(static_cast<std::size_t>(modes));
  for (auto& m : field) {
    m.a = amp(rng);
    m.xi.resize(spec.n);
    for (double& f : m.xi) f = static_cast<double>(freq(rng));
    m.eta = static_cast<double>(freq(rng));
    m.theta = phase(rng);
  }

  const double two_pi = 2.0 * std::acos(-1.0);
  const SpaceTimeBox& dom = spec.domain;
  return GridFunction::sample(spec, [&](const std::vector<double>& x, double t) {
    double s = 0.0;
    for (const auto& m : field) {
      double arg = m.theta;
      for (int a = 0; a < spec.n; ++a)
        arg += two_pi * m.xi[a] * (x[a] - dom.spatial_lo[a]) /
               (dom.spatial_hi[a] - dom.spatial_lo[a]);
      arg += two_pi * m.eta * (t - dom.time_lo) / dom.time_extent();
      s += m.a * std::cos(arg);
    }
    return std::exp(s);
  });
}

GridFunction rough_random(const GridSpec& spec, std::uint64_t seed, double lo,
                          double hi) {
  if (!(lo < hi)) fail_usage("rough_random: lo must be below hi");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> vals(spec.total_cells());
  for (double& v : vals) v = dist(rng);
  return GridFunction(spec, std::move(vals));
}

GridFunction indicator(const GridSpec& spec, const SpaceTimeBox& box, double outside) {
  GridSpec::IndexBox ib = spec.snap(box);
  if (!spec.index_box_inside(ib) || ib.empty())
    fail_data("indicator: box snapped empty or outside the grid");
  std::vector<double> vals(spec.total_cells(), outside);
  std::vector<int> ix(spec.n);
  int it;
  for (std::size_t idx = 0; idx < vals.size(); ++idx) {
    spec.unflatten(idx, ix, it);
    bool inside = it >= ib.t_lo && it < ib.t_hi;
    for (int a = 0; a < spec.n && inside; ++a)
      inside = ix[a] >= ib.lo[a] && ix[a] < ib.hi[a];
    if (inside) vals[idx] = 1.0;
  }
  return GridFunction(spec, std::move(vals));
}

GridFunction synthetic_grid(const std::string& name, const GridSpec& spec,
                            std::uint64_t seed) {
  if (name == "one") return GridFunction::constant(spec, 1.0);
  if (name == "exp-t")
    return GridFunction::sample(
        spec, [](const std::vector<double>&, double t) { return std::exp(t); });
  if (name == "exp-neg-t")
    return GridFunction::sample(
        spec, [](const std::vector<double>&, double t) { return std::exp(-t); });
  if (name == "log-smooth") return log_smooth_random(spec, seed);
  if (name == "rough") return rough_random(spec, seed, 0.5, 2.0);
  if (name == "indicator") {
    SpaceTimeBox central = spec.domain;
    for (int a = 0; a < spec.n; ++a) {
      double quarter = 0.25 * (central.spatial_hi[a] - central.spatial_lo[a]);
      central.spatial_lo[a] += quarter;
      central.spatial_hi[a] -= quarter;
    }
    double quarter = 0.25 * central.time_extent();
    central.time_lo += quarter;
    central.time_hi -= quarter;
    return indicator(spec, central);
  }
  if (name == "heat-kernel") {
    const double t0 = spec.domain.time_lo - 0.25 * spec.domain.time_extent();
    const double pi = std::acos(-1.0);
    std::vector<double> x0(spec.n);
    for (int a = 0; a < spec.n; ++a)
      x0[a] = 0.5 * (spec.domain.spatial_lo[a] + spec.domain.spatial_hi[a]);
    const int n = spec.n;
    return GridFunction::sample(spec, [x0, t0, n, pi](const std::vector<double>& x, double t) {
      double tau = t - t0;
      double r2 = 0.0;
      for (int a = 0; a < n; ++a) r2 += (x[a] - x0[a]) * (x[a] - x0[a]);
      return std::pow(4.0 * pi * tau, -0.5 * n) * std::exp(-r2 / (4.0 * tau));
    });
  }
  fail_usage("unknown synthetic grid name: " + name);
}

}  // namespace parweight
