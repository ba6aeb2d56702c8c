#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "parweight/error.hpp"
#include "parweight/gridfn.hpp"
#include "parweight/maximal.hpp"
#include "parweight/synthetic.hpp"

using namespace parweight;

TEST_CASE("constant input gives a constant output wherever defined") {
  GridSpec spec = oracles::make_spec_1d(32, 64, 0.0, 1.0, 0.0, 1.0);
  Exponents exps(2.0, 2.0, 0.25);
  GridFunction f = GridFunction::constant(spec, 2.5);
  MaximalOptions opt;
  opt.scales = dyadic_scales(spec, exps, 3);
  MaximalResult res = maximal_forward(f, exps, opt);
  CHECK(res.valid_count > 0);
  for (std::size_t i = 0; i < res.output.size(); ++i)
    if (res.valid[i]) CHECK(res.output.value(i) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("sublinearity and monotonicity") {
  GridSpec spec = oracles::make_spec_1d(24, 48, 0.0, 1.0, 0.0, 1.0);
  Exponents exps(2.0, 2.0, 0.25);
  MaximalOptions opt;
  opt.scales = dyadic_scales(spec, exps, 3);

  GridFunction f = rough_random(spec, 41, 0.0, 2.0);
  GridFunction g = rough_random(spec, 42, 0.0, 2.0);

  MaximalResult mf = maximal_forward(f, exps, opt);
  MaximalResult mg = maximal_forward(g, exps, opt);
  MaximalResult mfg = maximal_forward(gf_sum(f, g), exps, opt);
  for (std::size_t i = 0; i < mf.output.size(); ++i) {
    if (!mf.valid[i]) continue;
    CHECK(mfg.valid[i] == 1);
    CHECK(mfg.output.value(i) <=
          (mf.output.value(i) + mg.output.value(i)) * (1.0 + 1e-12));
  }

  GridFunction h = gf_sum(f, GridFunction::constant(spec, 0.5));  // f <= h
  MaximalResult mh = maximal_forward(h, exps, opt);
  for (std::size_t i = 0; i < mf.output.size(); ++i)
    if (mf.valid[i]) CHECK(mf.output.value(i) <= mh.output.value(i) * (1.0 + 1e-12));
}

TEST_CASE("positive homogeneity") {
  GridSpec spec = oracles::make_spec_1d(24, 48, 0.0, 1.0, 0.0, 1.0);
  Exponents exps(3.0, 2.0, 0.0);
  MaximalOptions opt;
  opt.scales = dyadic_scales(spec, exps, 3);
  GridFunction f = rough_random(spec, 43, 0.0, 1.0);
  MaximalResult base = maximal_forward(f, exps, opt);

  // Power-of-two factor: bit-exact equality.
  MaximalResult doubled =
      maximal_forward(f.map([](double v) { return 2.0 * v; }), exps, opt);
  for (std::size_t i = 0; i < base.output.size(); ++i)
    if (base.valid[i]) CHECK(doubled.output.value(i) == 2.0 * base.output.value(i));

  MaximalResult scaled =
      maximal_forward(f.map([](double v) { return 1.7 * v; }), exps, opt);
  for (std::size_t i = 0; i < base.output.size(); ++i)
    if (base.valid[i])
      CHECK(scaled.output.value(i) ==
            doctest::Approx(1.7 * base.output.value(i)).epsilon(1e-13));
}

TEST_CASE("scale-set refinement never decreases the output") {
  GridSpec spec = oracles::make_spec_1d(24, 48, 0.0, 1.0, 0.0, 1.0);
  Exponents exps(2.0, 2.0, 0.25);
  MaximalOptions coarse;
  coarse.scales = dyadic_scales(spec, exps, 2);
  MaximalOptions fine = coarse;
  fine.scales = dyadic_scales(spec, exps, 4);
  GridFunction f = rough_random(spec, 44, 0.0, 2.0);
  MaximalResult mc = maximal_forward(f, exps, coarse);
  MaximalResult mfv = maximal_forward(f, exps, fine);
  for (std::size_t i = 0; i < mc.output.size(); ++i)
    if (mc.valid[i]) CHECK(mfv.output.value(i) >= mc.output.value(i));
}

TEST_CASE("time-reversal conjugacy is exact") {
  GridSpec spec = oracles::make_spec_1d(24, 48, 0.0, 1.0, 0.0, 1.0);
  Exponents exps(2.0, 2.0, 0.25);
  MaximalOptions opt;
  opt.scales = dyadic_scales(spec, exps, 3);
  GridFunction f = rough_random(spec, 45, 0.0, 2.0);

  MaximalResult direct = maximal_backward(f, exps, opt);
  MaximalResult conj = maximal_forward(reverse_time(f), exps, opt);
  GridFunction flipped = reverse_time(conj.output);
  std::vector<int> ix(1);
  int it;
  for (std::size_t i = 0; i < direct.output.size(); ++i) {
    f.spec().unflatten(i, ix, it);
    std::size_t mirror = f.spec().flatten(ix, spec.time_cells - 1 - it);
    CHECK(direct.valid[i] == conj.valid[mirror]);
    if (direct.valid[i]) {
      CHECK(direct.output.value(i) == flipped.value(i));
      CHECK(direct.argmax_scale[i] == conj.argmax_scale[mirror]);
    }
  }
}

TEST_CASE("prefix path matches the naive oracle path") {
  GridSpec spec = oracles::make_spec_1d(32, 32, 0.0, 1.0, 0.0, 1.0);
  Exponents exps(2.0, 2.0, 0.25);
  MaximalOptions fast;
  fast.scales = dyadic_scales(spec, exps, 3);
  MaximalOptions naive = fast;
  naive.naive = true;
  GridFunction f = rough_random(spec, 46, 0.0, 3.0);
  MaximalResult a = maximal_forward(f, exps, fast);
  MaximalResult b = maximal_forward(f, exps, naive);
  for (std::size_t i = 0; i < a.output.size(); ++i) {
    CHECK(a.valid[i] == b.valid[i]);
    if (a.valid[i])
      CHECK(a.output.value(i) == doctest::Approx(b.output.value(i)).epsilon(1e-12));
  }
}

TEST_CASE("indicator input: dense-scan oracle at (0.5, -0.5)") {
  // n=1, p=2, gamma=0, f = indicator of [0,1] x (0,1). The grid is chosen so
  // the support edges sit on cell boundaries and (0.5, -0.5) is a cell
  // center: h = 1/19 on [-2,3], ht = 1/41 on (-2,2).
  GridSpec spec = oracles::make_spec_1d(95, 164, -2.0, 3.0, -2.0, 2.0);
  Exponents exps(2.0, 2.0, 0.0);
  SpaceTimeBox support{{0.0}, {1.0}, 0.0, 1.0};
  GridFunction f = indicator(spec, support);

  std::vector<double> scan;
  for (double l = 0.05; l <= 3.0 + 1e-12; l += 0.005) scan.push_back(l);

  // Continuous-geometry oracle over the dense scan; the analytic maximum is
  // (3/2)^{-3/2} = 0.5443... at l = sqrt(3/2) = 1.2247.
  double oracle_full = 0.0;
  double oracle_arg = 0.0;
  for (double l : scan) {
    double v = oracles::indicator_upper_average(0.5, -0.5, l, exps.p, support);
    if (v > oracle_full) {
      oracle_full = v;
      oracle_arg = l;
    }
  }
  CHECK(oracle_full == doctest::Approx(0.544331).epsilon(2e-3));
  CHECK(oracle_arg == doctest::Approx(1.225).epsilon(0.03));

  MaximalOptions opt;
  opt.scales = scan;
  MaximalResult res = maximal_forward(f, exps, opt);
  std::size_t idx = spec.flatten({47}, 61);
  REQUIRE(res.valid[idx] == 1);
  CHECK(res.output.value(idx) == doctest::Approx(oracle_full).epsilon(0.02));
  CHECK(res.argmax_scale[idx] == doctest::Approx(oracle_arg).epsilon(0.05));

  // A coarse dyadic family stays within its refinement gap of the oracle.
  MaximalOptions dyadic;
  dyadic.scales = dyadic_scales(spec, exps, 4);
  double oracle_restricted = 0.0;
  for (double l : dyadic.scales)
    oracle_restricted = std::max(
        oracle_restricted, oracles::indicator_upper_average(0.5, -0.5, l, exps.p, support));
  MaximalResult coarse = maximal_forward(f, exps, dyadic);
  REQUIRE(coarse.valid[idx] == 1);
  CHECK(coarse.output.value(idx) == doctest::Approx(oracle_restricted).epsilon(0.05));
  CHECK(coarse.output.value(idx) <= res.output.value(idx) * (1.0 + 1e-12));
}

TEST_CASE("backward operator sees a point mass just after it in time") {
  GridSpec spec = oracles::make_spec_1d(64, 64, 0.0, 1.0, 0.0, 1.0);
  Exponents exps(2.0, 2.0, 0.0);
  std::vector<double> vals(spec.total_cells(), 0.0);
  vals[spec.flatten({32}, 20)] = 64.0;
  GridFunction f(spec, vals);
  double mass = 64.0 * spec.cell_volume();

  MaximalOptions opt;
  opt.scales = dyadic_scales(spec, exps, 4);
  MaximalResult res = maximal_backward(f, exps, opt);
  std::size_t eval = spec.flatten({32}, 21);
  REQUIRE(res.valid[eval] == 1);

  // Direct enumeration oracle over the same scale set.
  double expected = 0.0;
  double smallest_hit_vol = 0.0;
  for (double l : opt.scales) {
    ParabolicRectangle rect{{spec.center(0, 32)}, spec.time_center(21), l};
    SpaceTimeBox lower = rect.lower_half(exps.p, exps.gamma);
    GridSpec::IndexBox ib = spec.snap(lower);
    if (!spec.index_box_inside(ib) || ib.empty()) continue;
    double avg = oracles::direct_box_average(f, lower);
    if (avg > 0.0 && smallest_hit_vol == 0.0)
      smallest_hit_vol = static_cast<double>(ib.count()) * spec.cell_volume();
    expected = std::max(expected, avg);
  }
  CHECK(res.output.value(eval) == doctest::Approx(expected).epsilon(1e-12));
  REQUIRE(smallest_hit_vol > 0.0);
  CHECK(res.output.value(eval) >= mass / smallest_hit_vol * (1.0 - 1e-12));
}

TEST_CASE("no admissible scale anywhere is an error") {
  GridSpec spec = oracles::make_spec_1d(16, 16, 0.0, 1.0, 0.0, 1.0);
  Exponents exps(2.0, 2.0, 0.0);
  MaximalOptions opt;
  opt.scales = {100.0};
  GridFunction f = GridFunction::constant(spec, 1.0);
  CHECK_THROWS_AS(maximal_forward(f, exps, opt), Error);
}

TEST_CASE("argmax scales belong to the scale set") {
  GridSpec spec = oracles::make_spec_1d(24, 48, 0.0, 1.0, 0.0, 1.0);
  Exponents exps(2.0, 2.0, 0.25);
  MaximalOptions opt;
  opt.scales = dyadic_scales(spec, exps, 3);
  GridFunction f = rough_random(spec, 47, 0.0, 2.0);
  MaximalResult res = maximal_forward(f, exps, opt);
  for (std::size_t i = 0; i < res.output.size(); ++i) {
    if (!res.valid[i]) continue;
    bool member = false;
    for (double l : res.scales) member = member || res.argmax_scale[i] == l;
    CHECK(member);
  }
}
