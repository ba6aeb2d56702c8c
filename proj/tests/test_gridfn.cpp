#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "oracles.hpp"
#include "parweight/csv_io.hpp"
#include "parweight/error.hpp"
#include "parweight/gridfn.hpp"
#include "parweight/synthetic.hpp"

using namespace parweight;

namespace {

SpaceTimeBox sub_box(const GridSpec& spec, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> tpick(0, spec.time_cells);
  SpaceTimeBox b;
  b.spatial_lo.resize(spec.n);
  b.spatial_hi.resize(spec.n);
  for (int a = 0; a < spec.n; ++a) {
    std::uniform_int_distribution<int> xpick(0, spec.cells[a]);
    int i = xpick(rng), j = xpick(rng);
    if (i == j) j = i < spec.cells[a] ? i + 1 : i - 1;
    if (i > j) std::swap(i, j);
    b.spatial_lo[a] = spec.domain.spatial_lo[a] + i * spec.spatial_step(a);
    b.spatial_hi[a] = spec.domain.spatial_lo[a] + j * spec.spatial_step(a);
  }
  int i = tpick(rng), j = tpick(rng);
  if (i == j) j = i < spec.time_cells ? i + 1 : i - 1;
  if (i > j) std::swap(i, j);
  b.time_lo = spec.domain.time_lo + i * spec.time_step();
  b.time_hi = spec.domain.time_lo + j * spec.time_step();
  return b;
}

}  // namespace

TEST_CASE("box averages: constants, linear time, indicator oracle") {
  GridSpec spec = oracles::make_spec_1d(32, 64, 0.0, 1.0, 0.0, 1.0);

  SUBCASE("constant function averages to the constant") {
    GridFunction f = GridFunction::constant(spec, 3.25);
    SpaceTimeBox b{{0.25}, {0.75}, 0.125, 0.5};
    CHECK(box_average(f, b) == doctest::Approx(3.25).epsilon(1e-15));
  }

  SUBCASE("f = t averages to the midpoint on symmetric cells") {
    GridFunction f = GridFunction::sample(
        spec, [](const std::vector<double>&, double t) { return t; });
    SpaceTimeBox b{{0.0}, {1.0}, 0.25, 0.75};
    CHECK(box_average(f, b) == doctest::Approx(0.5).epsilon(1e-14));
  }

  SUBCASE("indicator average equals |S|/|B| after snapping") {
    SpaceTimeBox s{{0.25}, {0.5}, 0.25, 0.5};
    GridFunction f = indicator(spec, s);
    SpaceTimeBox b{{0.0}, {1.0}, 0.0, 1.0};
    double direct = oracles::direct_box_average(f, b);
    CHECK(box_average(f, b) == doctest::Approx(direct).epsilon(1e-14));
    CHECK(box_average(f, b) ==
          doctest::Approx(s.volume() / b.volume()).epsilon(1e-12));
  }

  SUBCASE("boxes outside the domain or snapped empty are errors") {
    GridFunction f = GridFunction::constant(spec, 1.0);
    SpaceTimeBox outside{{-0.5}, {0.5}, 0.0, 1.0};
    CHECK_THROWS_AS(box_average(f, outside), Error);
    SpaceTimeBox thin{{0.0}, {1.0}, 0.5, 0.5 + 1e-9};
    CHECK_THROWS_AS(box_average(f, thin), Error);
  }
}

TEST_CASE("prefix tables agree with direct summation on random boxes") {
  GridSpec spec = oracles::make_spec_1d(64, 64, -1.0, 1.0, 0.0, 2.0);
  GridFunction f = rough_random(spec, 99, 0.25, 4.0);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    SpaceTimeBox b = sub_box(spec, rng);
    for (double e : {1.0, -1.0, 0.5}) {
      double via_table = box_average(f, b, e);
      double direct = oracles::direct_box_average(f, b, e);
      CHECK(via_table == doctest::Approx(direct).epsilon(1e-10));
    }
  }
}

TEST_CASE("average bounds and Jensen direction") {
  GridSpec spec = oracles::make_spec_1d(48, 48, 0.0, 1.0, 0.0, 1.0);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    GridFunction f = rough_random(spec, 1000 + trial, 0.2, 5.0);
    SpaceTimeBox b = sub_box(spec, rng);
    double avg = box_average(f, b, 1.0);
    CHECK(avg >= f.min_value());
    CHECK(avg <= f.max_value());
    // (avg f)^e <= avg f^e for the convex power e = 1 - q' < 0.
    for (double q : {1.5, 2.0, 3.0}) {
      double e = 1.0 - q / (q - 1.0);
      CHECK(std::pow(avg, e) <= box_average(f, b, e) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("power transform: identity, reciprocal, conjugate round trip") {
  GridSpec spec = oracles::make_spec_1d(16, 16, 0.0, 1.0, 0.0, 1.0);
  GridFunction f = rough_random(spec, 5, 0.5, 2.0);

  GridFunction same = power_transform(f, 1.0);
  CHECK(same.values() == f.values());

  // q = 2: 1 - q' = -1.
  GridFunction inv = power_transform(f, -1.0);
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(inv.value(i) == doctest::Approx(1.0 / f.value(i)).epsilon(1e-15));

  for (double q : {1.5, 2.0, 4.0}) {
    double qc = q / (q - 1.0);
    GridFunction back = power_transform(power_transform(f, 1.0 - qc), 1.0 - q);
    for (std::size_t i = 0; i < f.size(); ++i)
      CHECK(back.value(i) == doctest::Approx(f.value(i)).epsilon(1e-13));
  }

  GridFunction with_zero(spec, std::vector<double>(spec.total_cells(), 0.0));
  CHECK_THROWS_AS(power_transform(with_zero, -1.0), Error);
}

TEST_CASE("level measure") {
  GridSpec spec = oracles::make_spec_1d(32, 64, 0.0, 1.0, 0.0, 1.0);
  GridFunction f = GridFunction::sample(
      spec, [](const std::vector<double>&, double t) { return t; });
  SpaceTimeBox region = spec.domain;

  CHECK(level_measure(f, -1.0, region) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(level_measure(f, f.max_value(), region) == 0.0);

  // f(x,t) = t, lambda = 0.5: measure 0.5 within one time-cell volume.
  double m = level_measure(f, 0.5, region);
  CHECK(std::abs(m - 0.5) <= spec.time_step() + 1e-12);

  GridFunction w = GridFunction::constant(spec, 2.0);
  CHECK(level_measure(f, 0.5, region, &w) == doctest::Approx(2.0 * m).epsilon(1e-12));
}

TEST_CASE("combine modes") {
  GridSpec spec = oracles::make_spec_1d(16, 16, 0.0, 1.0, 0.0, 1.0);
  GridFunction u = rough_random(spec, 11, 0.5, 2.0);
  GridFunction v = rough_random(spec, 12, 0.5, 2.0);

  GridFunction mn = combine(u, u, CombineMode::min);
  CHECK(mn.values() == u.values());

  GridFunction muv = combine(u, v, CombineMode::min);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(muv.value(i) <= u.value(i));

  GridFunction et = GridFunction::sample(
      spec, [](const std::vector<double>&, double t) { return std::exp(t); });
  GridFunction emt = GridFunction::sample(
      spec, [](const std::vector<double>&, double t) { return std::exp(-t); });
  GridFunction prod = combine(et, emt, CombineMode::product);
  for (std::size_t i = 0; i < prod.size(); ++i)
    CHECK(prod.value(i) == doctest::Approx(1.0).epsilon(1e-14));

  GridFunction tiny = GridFunction::constant(spec, 1e-15);
  CHECK_THROWS_AS(combine(u, tiny, CombineMode::quotient), Error);
}

TEST_CASE("weight clamp on ingestion") {
  GridSpec spec = oracles::make_spec_1d(8, 8, 0.0, 1.0, 0.0, 1.0);
  std::vector<double> vals(spec.total_cells(), 1.0);
  vals[3] = 0.0;
  vals[7] = -2.0;
  ClampResult r = clamp_weight(GridFunction(spec, vals), 1e-12, false);
  CHECK(r.clamped_cells == 2);
  CHECK(r.values.min_value() == 1e-12);
}

TEST_CASE("time reversal is an involution and flips slices") {
  GridSpec spec = oracles::make_spec_1d(8, 10, 0.0, 1.0, 0.0, 1.0);
  GridFunction f = rough_random(spec, 21, 0.0, 1.0);
  GridFunction r = reverse_time(f);
  std::vector<int> ix{3};
  CHECK(r.value(spec.flatten(ix, 0)) == f.value(spec.flatten(ix, 9)));
  GridFunction rr = reverse_time(r);
  CHECK(rr.values() == f.values());
}

TEST_CASE("CSV round trip is bit-exact") {
  GridSpec spec = oracles::make_spec_1d(16, 8, -0.5, 1.5, 0.25, 2.0);
  GridFunction f = rough_random(spec, 31, 1e-6, 1e6);
  std::string path = "roundtrip_test.csv";
  write_grid_csv(path, f);
  GridFunction g = read_grid_csv(path);
  CHECK(g.spec().same_layout(spec));
  REQUIRE(g.size() == f.size());
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(g.value(i) == f.value(i));
  std::remove(path.c_str());
}
