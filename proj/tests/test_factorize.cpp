#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "parweight/error.hpp"
#include "parweight/factorize.hpp"
#include "parweight/synthetic.hpp"

using namespace parweight;

namespace {

GridFunction exp_weight(const GridSpec& spec, double c) {
  return GridFunction::sample(
      spec, [c](const std::vector<double>&, double t) { return std::exp(c * t); });
}

}  // namespace

TEST_CASE("operator T reduces to the two maximal functions for w = 1, q = 2") {
  GridSpec spec = oracles::make_spec_1d(24, 48, 0.0, 1.0, 0.0, 1.0);
  Exponents exps(2.0, 2.0, 0.25);
  MaximalOptions opt;
  opt.scales = dyadic_scales(spec, exps, 3);
  GridFunction one = GridFunction::constant(spec, 1.0);
  GridFunction f = rough_random(spec, 61, 0.0, 2.0);

  MaskedGrid t = rdf_operator(f, one, exps, opt);
  MaximalResult mb = maximal_backward(f, exps, opt);
  MaximalResult mf = maximal_forward(f, exps, opt);
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    if (!t.valid[i]) continue;
    CHECK(t.values.value(i) ==
          doctest::Approx(mb.output.value(i) + mf.output.value(i)).epsilon(1e-13));
  }

  GridFunction c = GridFunction::constant(spec, 1.5);
  MaskedGrid tc = rdf_operator(c, one, exps, opt);
  for (std::size_t i = 0; i < tc.values.size(); ++i)
    if (tc.valid[i]) CHECK(tc.values.value(i) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("operator T is sublinear for q >= 2") {
  GridSpec spec = oracles::make_spec_1d(24, 48, 0.0, 1.0, 0.0, 1.0);
  MaximalOptions opt;
  GridFunction w = exp_weight(spec, 1.0);
  for (double q : {2.0, 3.0}) {
    Exponents exps(2.0, q, 0.25);
    opt.scales = dyadic_scales(spec, exps, 3);
    for (int trial = 0; trial < 3; ++trial) {
      GridFunction f = rough_random(spec, 600 + trial, 0.0, 2.0);
      GridFunction g = rough_random(spec, 700 + trial, 0.0, 2.0);
      MaskedGrid tf = rdf_operator(f, w, exps, opt);
      MaskedGrid tg = rdf_operator(g, w, exps, opt);
      MaskedGrid tfg = rdf_operator(gf_sum(f, g), w, exps, opt);
      for (std::size_t i = 0; i < tf.values.size(); ++i)
        if (tf.valid[i])
          CHECK(tfg.values.value(i) <=
                (tf.values.value(i) + tg.values.value(i)) * (1.0 + 1e-12));
    }
  }
  Exponents low(2.0, 1.5, 0.25);
  opt.scales = dyadic_scales(spec, low, 3);
  CHECK_THROWS_AS(rdf_operator(GridFunction::constant(spec, 1.0), w, low, opt), Error);
}

TEST_CASE("factorization of the unit weight is constant") {
  GridSpec spec = oracles::make_spec_1d(24, 48, 0.0, 1.0, 0.0, 1.0);
  Exponents exps(2.0, 2.0, 0.25);
  FactorizeOptions opt;
  opt.maximal.scales = dyadic_scales(spec, exps, 3);
  GridFunction one = GridFunction::constant(spec, 1.0);
  FactorizationResult res = factorize(one, exps, opt);

  CHECK(res.residual <= 1e-12);
  for (std::size_t i = 0; i < res.u.size(); ++i)
    CHECK(res.u.value(i) == doctest::Approx(res.v.value(i)).epsilon(1e-13));
  // u = v = phi for w = 1.
  for (std::size_t i = 0; i < res.u.size(); ++i)
    CHECK(res.u.value(i) == doctest::Approx(res.phi.value(i)).epsilon(1e-13));
  CHECK(res.a1_u == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.a1_v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("algebraic reconstruction holds for every factorization") {
  GridSpec spec = oracles::make_spec_1d(24, 64, 0.0, 1.0, 0.0, 1.0);
  for (double q : {2.0, 3.0, 1.5}) {
    Exponents exps(2.0, q, 0.25);
    FactorizeOptions opt;
    opt.maximal.scales = dyadic_scales(spec, exps, 3);
    for (int trial = 0; trial < 2; ++trial) {
      GridFunction w =
          trial == 0 ? exp_weight(spec, 1.0) : log_smooth_random(spec, 40 + trial);
      FactorizationResult res = factorize(w, exps, opt);
      CHECK(res.residual <= 1e-12);
      CHECK(res.terms >= 1);
      CHECK(std::isfinite(res.a1_u));
      CHECK(std::isfinite(res.a1_v));
    }
  }
}

TEST_CASE("fixed-point inequality and factor maximal bounds") {
  GridSpec spec = oracles::make_spec_1d(24, 64, 0.0, 1.0, 0.0, 1.0);
  Exponents exps(2.0, 2.0, 0.25);
  FactorizeOptions opt;
  opt.maximal.scales = dyadic_scales(spec, exps, 3);
  GridFunction w = exp_weight(spec, 1.0);
  FactorizationResult res = factorize(w, exps, opt);

  // T(phi) <= 2B phi + (truncated tail) pointwise.
  CHECK(res.fixed_point_margin >= -1e-9);

  // The factors inherit the pointwise maximal bounds:
  // M^{gamma-} u <= (2B)^{q-1} u and M^{gamma+} v <= 2B v, up to tail slack.
  MaximalResult mu = maximal_backward(res.u, exps, opt.maximal);
  MaximalResult mv = maximal_forward(res.v, exps, opt.maximal);
  double slack = 1.0 + 1e-5;
  for (std::size_t i = 0; i < mu.output.size(); ++i) {
    if (!res.valid[i]) continue;
    if (mu.valid[i])
      CHECK(mu.output.value(i) <=
            std::pow(2.0 * res.B, exps.q - 1.0) * res.u.value(i) * slack);
    if (mv.valid[i])
      CHECK(mv.output.value(i) <= 2.0 * res.B * res.v.value(i) * slack);
  }

  // Convergence trace exists and ends below the stopping threshold.
  REQUIRE(!res.term_maxima.empty());
  CHECK(res.term_maxima.back() < res.term_maxima.front());
}

TEST_CASE("low-index route via the dual weight") {
  GridSpec spec = oracles::make_spec_1d(24, 64, 0.0, 1.0, 0.0, 1.0);
  Exponents exps(2.0, 1.5, 0.25);
  FactorizeOptions opt;
  opt.maximal.scales = dyadic_scales(spec, exps, 3);
  GridFunction w = exp_weight(spec, 1.0);
  FactorizationResult res = factorize(w, exps, opt);
  CHECK(res.residual <= 1e-12);
  // Factors are genuinely positive grids.
  CHECK(res.u.min_value() > 0.0);
  CHECK(res.v.min_value() > 0.0);
}

TEST_CASE("product synthesis check") {
  GridSpec spec = oracles::make_spec_1d(32, 128, 0.0, 1.0, 0.0, 0.5);
  Exponents exps(2.0, 2.0, 0.2);  // gamma < delta 2^{1-p} with delta = 0.5
  RectangleFamily family = enumerate_family(
      spec, exps.with_gamma(0.5), FamilyOptions{3, 0.5, 0.0});

  GridFunction one = GridFunction::constant(spec, 1.0);
  WeightReport unit = product_synthesis_check(one, one, exps, 0.5, family);
  CHECK(unit.constant == 1.0);

  GridFunction u = exp_weight(spec, 1.0);
  WeightReport rep = product_synthesis_check(u, one, exps, 0.5, family);
  CHECK(rep.constant <= 1.0);

  // Lag relation gamma < delta 2^{1-p} enforced.
  Exponents bad(2.0, 2.0, 0.3);
  CHECK_THROWS_AS(product_synthesis_check(u, one, bad, 0.5, family), Error);
}

TEST_CASE("extension fills invalid cells from the nearest valid ones") {
  GridSpec spec = oracles::make_spec_1d(8, 8, 0.0, 1.0, 0.0, 1.0);
  GridFunction f = rough_random(spec, 3, 0.0, 1.0);
  GridSpec::IndexBox box;
  box.lo = {2};
  box.hi = {6};
  box.t_lo = 2;
  box.t_hi = 6;
  GridFunction e = extend_from_box(f, box);
  CHECK(e.value(spec.flatten({2}, 2)) == f.value(spec.flatten({2}, 2)));
  CHECK(e.value(spec.flatten({0}, 0)) == f.value(spec.flatten({2}, 2)));
  CHECK(e.value(spec.flatten({7}, 7)) == f.value(spec.flatten({5}, 5)));
  CHECK(e.value(spec.flatten({4}, 0)) == f.value(spec.flatten({4}, 2)));
}
