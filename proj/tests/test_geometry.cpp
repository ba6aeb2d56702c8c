#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "parweight/error.hpp"
#include "parweight/family.hpp"
#include "parweight/geometry.hpp"

using namespace parweight;

TEST_CASE("exponent triple validation and conjugacy") {
  Exponents e(2.0, 2.0, 0.5);
  CHECK(e.q_conjugate() == doctest::Approx(2.0));
  for (double q : {1.5, 2.0, 3.0, 4.0}) {
    Exponents x(2.0, q, 0.0);
    CHECK((1.0 - x.q_conjugate()) * (1.0 - q) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(Exponents(1.0, 2.0, 0.0), Error);
  CHECK_THROWS_AS(Exponents(2.0, 1.0, 0.0), Error);
  CHECK_THROWS_AS(Exponents(2.0, 2.0, 1.0), Error);
  CHECK_THROWS_AS(Exponents(2.0, 2.0, -0.1), Error);
}

TEST_CASE("lagged halves match the defining boxes") {
  // (x=0, t=0, l=1, p=2, gamma=0.5): R^+ = [-0.5,0.5] x (0.5, 1),
  // R^- = [-0.5,0.5] x (-1, -0.5).
  ParabolicRectangle rect{{0.0}, 0.0, 1.0};
  auto [lower, upper] = lagged_halves(rect, 2.0, 0.5);
  CHECK(upper.spatial_lo[0] == doctest::Approx(-0.5));
  CHECK(upper.spatial_hi[0] == doctest::Approx(0.5));
  CHECK(upper.time_lo == doctest::Approx(0.5));
  CHECK(upper.time_hi == doctest::Approx(1.0));
  CHECK(lower.time_lo == doctest::Approx(-1.0));
  CHECK(lower.time_hi == doctest::Approx(-0.5));

  SUBCASE("gamma = 0 gives the full halves") {
    auto [lo0, up0] = lagged_halves(rect, 2.0, 0.0);
    CHECK(up0.time_lo == doctest::Approx(0.0));
    CHECK(up0.time_hi == doctest::Approx(1.0));
    CHECK(lo0.time_lo == doctest::Approx(-1.0));
    CHECK(lo0.time_hi == doctest::Approx(0.0));
  }

  SUBCASE("half volumes are l^n (1-gamma) l^p") {
    // l=2, n=1, p=3, gamma=0.25: 2 * 0.75 * 8 = 12.
    ParabolicRectangle r{{0.0}, 0.0, 2.0};
    auto [lo, up] = lagged_halves(r, 3.0, 0.25);
    CHECK(lo.volume() == doctest::Approx(12.0));
    CHECK(up.volume() == doctest::Approx(12.0));
    CHECK(r.bounds(3.0).volume() == doctest::Approx(2.0 * 2.0 * 8.0));
  }
}

TEST_CASE("reflection symmetry of the halves is exact") {
  ParabolicRectangle rect{{0.25, -1.0}, 0.75, 0.5};
  for (double gamma : {0.0, 0.25, 0.6}) {
    auto [lower, upper] = lagged_halves(rect, 2.5, gamma);
    CHECK(rect.center_t - lower.time_hi == upper.time_lo - rect.center_t);
    CHECK(rect.center_t - lower.time_lo == upper.time_hi - rect.center_t);
    CHECK(lower.spatial_lo == upper.spatial_lo);
    CHECK(lower.spatial_hi == upper.spatial_hi);
  }
}

TEST_CASE("monotonicity in gamma and the p-scaling law") {
  ParabolicRectangle rect{{0.0}, 0.0, 1.5};
  auto up = [&](double p, double g) { return rect.upper_half(p, g); };
  for (double p : {2.0, 3.0, 2.7}) {
    SpaceTimeBox a = up(p, 0.2);
    SpaceTimeBox b = up(p, 0.5);
    CHECK(a.contains(b));       // larger lag shrinks the upper half
    CHECK(!b.contains(a));
    // Doubling l scales the time extent of R by 2^p.
    ParabolicRectangle big{{0.0}, 0.0, 3.0};
    double ratio = big.bounds(p).time_extent() / rect.bounds(p).time_extent();
    CHECK(ratio == doctest::Approx(std::pow(2.0, p)).epsilon(1e-12));
  }
}

TEST_CASE("time translation") {
  SpaceTimeBox b{{0.0}, {1.0}, 0.0, 1.0};
  SpaceTimeBox shifted = translate_time(b, 1.0);
  CHECK(shifted.time_lo == doctest::Approx(1.0));
  CHECK(shifted.time_hi == doctest::Approx(2.0));
  CHECK(shifted.spatial_lo[0] == 0.0);

  SpaceTimeBox same = translate_time(b, 0.0);
  CHECK(same.time_lo == b.time_lo);
  CHECK(same.time_hi == b.time_hi);

  SpaceTimeBox back = translate_time(translate_time(b, 0.37), -0.37);
  CHECK(back.time_lo == doctest::Approx(b.time_lo));
  CHECK(back.time_hi == doctest::Approx(b.time_hi));
}

TEST_CASE("family enumeration: containment, determinism, count oracle") {
  GridSpec spec = oracles::make_spec_1d(64, 128, 0.0, 1.0, 0.0, 2.0);
  Exponents exps(2.0, 2.0, 0.0);

  SUBCASE("containment of snapped halves is forced") {
    RectangleFamily fam = enumerate_family(spec, exps, FamilyOptions{3, 0.5, 0.0});
    CHECK(fam.size() > 0);
    for (const auto& rect : fam.rectangles) {
      auto [lower, upper] = lagged_halves(rect, exps.p, exps.gamma);
      for (const auto& half : {lower, upper}) {
        GridSpec::IndexBox ib = spec.snap(half);
        CHECK(spec.index_box_inside(ib));
        CHECK(!ib.empty());
      }
    }
  }

  SUBCASE("count matches the brute-force lattice oracle") {
    // domain [0,1] x (0,2), l in {1/4, 1/2}, stride 1/2.
    FamilyOptions opt{2, 0.5, 0.25};
    RectangleFamily fam = enumerate_family(spec, exps, opt);
    std::size_t expected =
        oracles::family_count_oracle(spec, exps, 0.25, 2, 0.5);
    CHECK(fam.size() == expected);
    CHECK(fam.provenance.scales.size() == 2);
  }

  SUBCASE("oversized scales are skipped, not truncated") {
    FamilyOptions opt{8, 1.0, 0.25};
    RectangleFamily fam = enumerate_family(spec, exps, opt);
    // 2 l^p beyond the time extent for l >= 1: only smaller scales survive.
    for (double l : fam.provenance.scales) CHECK(2.0 * l * l <= 2.0 + 1e-12);
  }

  SUBCASE("no fitting scale is an error, not an empty family") {
    FamilyOptions opt{1, 1.0, 64.0};
    CHECK_THROWS_AS(enumerate_family(spec, exps, opt), Error);
  }

  SUBCASE("enumeration order is stable") {
    RectangleFamily a = enumerate_family(spec, exps, FamilyOptions{2, 0.5, 0.25});
    RectangleFamily b = enumerate_family(spec, exps, FamilyOptions{2, 0.5, 0.25});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.rectangles[i].side == b.rectangles[i].side);
      CHECK(a.rectangles[i].center_t == b.rectangles[i].center_t);
      CHECK(a.rectangles[i].center_x == b.rectangles[i].center_x);
    }
  }

  SUBCASE("refinement contains the original family") {
    FamilyOptions opt{2, 0.5, 0.25};
    RectangleFamily coarse = enumerate_family(spec, exps, opt);
    RectangleFamily fine = enumerate_family(spec, exps, refined(opt, spec, exps));
    CHECK(fine.size() > coarse.size());
    for (const auto& rect : coarse.rectangles) {
      bool found = false;
      for (const auto& other : fine.rectangles) {
        if (other.side == rect.side && other.center_t == rect.center_t &&
            other.center_x == rect.center_x) {
          found = true;
          break;
        }
      }
      CHECK(found);
    }
  }
}
