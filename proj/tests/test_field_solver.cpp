#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "blowup/closed_forms.hpp"
#include "blowup/extrapolation.hpp"
#include "blowup/field_solver.hpp"
#include "blowup/verifier.hpp"
#include "oracles.hpp"

using namespace blowup;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

Domain2D rectangle() { return make_polygon({Point2(-1, 0), Point2(1, 0), Point2(1, 1), Point2(-1, 1)}); }

}  // namespace

TEST_CASE("radial ball profiles against the closed form") {
  for (int n : {3, 4}) {
    const RadialProfile p = solve_radial(n, 0.0, 1.0, 100000);
    CHECK(p.u[0] == doctest::Approx(n == 3 ? std::sqrt(2.0) : 2.0).epsilon(1e-3));
    for (double r : {0.0, 0.25, 0.5}) {
      CHECK(p.eval(r) == doctest::Approx(oracle::ball_inside(n, 1.0, r)).epsilon(1e-4));
    }
    for (std::size_t l = 1; l < p.level_values.size(); ++l) {
      for (std::size_t j = 0; j < p.r.size(); j += 97) CHECK(p.level_values[l][j] >= p.level_values[l - 1][j] - 1e-9);
    }
  }
}

TEST_CASE("radial exterior shell with exact outer data") {
  RadialOptions o;
  o.outer_value = oracle::ball_outside(4, 1.0, 3.0);
  const RadialProfile p = solve_radial(4, 1.0, 3.0, 400000, o);
  double worst = 0.0;
  for (std::size_t j = 0; j < p.r.size(); j += 50) {
    if (p.r[j] < 1.05) continue;
    worst = std::max(worst, std::abs(p.u[j] / oracle::ball_outside(4, 1.0, p.r[j]) - 1.0));
  }
  CHECK(worst <= 1e-4);
  CHECK(code_of([] { solve_radial(4, 1.0, 3.0, 1000); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("geometric tail extrapolation") {
  CHECK(geometric_tail(1.0 - 0.25, 1.0 - 0.125, 1.0 - 0.0625).value == doctest::Approx(1.0).epsilon(1e-15));
  const TailEstimate flat = geometric_tail(2.0, 2.0, 2.0);
  CHECK(flat.value == 2.0);
  CHECK(flat.error == 0.0);
  CHECK(code_of([] { geometric_tail(1.0, 0.5, 0.7); }) == ErrorCode::NonMonotoneTail);
  const TailEstimate growing = geometric_tail(1.0, 1.1, 1.3);
  CHECK_FALSE(growing.contracting);
  CHECK(std::isinf(growing.error));
}

TEST_CASE("disk cross-section against the shooting oracle") {
  const std::vector<double> radii{0.0, 0.3, 0.5, 0.7, 0.8};
  const std::vector<double> ref = oracle::disk_profile_by_shooting(3, radii);
  const Domain2D disk = make_disk(Point2::Zero(), 1.0);
  SUBCASE("substitution form") {
    const SubstitutionResult s = solve_cross_section_substitution(3, disk, 0.02);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      CHECK(s.field.sample(Point2(radii[i], 0.0)) == doctest::Approx(ref[i]).epsilon(2e-4));
    }
  }
  SUBCASE("truncation levels with first-order refinement in h") {
    CrossSectionOptions o;
    const ScalarField coarse = solve_cross_section(3, disk, 0.02, o).fields.back();
    const ScalarField fine = solve_cross_section(3, disk, 0.01, o).fields.back();
    for (std::size_t i = 0; i < 3; ++i) {
      const Point2 x(radii[i], 0.0);
      CHECK(fine.sample(x) > ref[i]);
      CHECK(2.0 * fine.sample(x) - coarse.sample(x) == doctest::Approx(ref[i]).epsilon(2e-3));
    }
  }
}

TEST_CASE("half-plane limit on a polygon edge") {
  // Straight edge y = 0 of the rectangle [-1, 1] x [0, 1]; the local limit of d^{1/2} u is one.
  const Point2 x(0.0, 0.05);
  const double a = std::sqrt(0.05) * solve_cross_section(3, rectangle(), 1.0 / 50).fields.back().sample(x);
  const double b = std::sqrt(0.05) * solve_cross_section(3, rectangle(), 1.0 / 100).fields.back().sample(x);
  CHECK(b < a);
  CHECK(2.0 * b - a == doctest::Approx(1.0).epsilon(2e-2));
  const ScalarField s = solve_cross_section_substitution(3, rectangle(), 1.0 / 100).field;
  CHECK(std::sqrt(0.05) * s.sample(x) == doctest::Approx(1.0).epsilon(2e-2));
}

TEST_CASE("levels are monotone and sandwiched by ball barriers") {
  const Domain2D disk = make_disk(Point2::Zero(), 1.0);
  CrossSectionOptions o;
  o.probes = {Point2(0, 0), Point2(0.9, 0), Point2(0.96, 0)};
  const CrossSectionResult res = solve_cross_section(3, disk, 0.02, o);
  CHECK(res.fields.size() == 10);
  CHECK(max_level_decrease(res.fields) <= 1e-9);
  for (std::size_t l = 0; l < res.fields.size(); ++l) CHECK(res.report.levels[l] == doctest::Approx(10.0 * std::pow(2.0, l)));

  const ScalarField& top = res.fields.back();
  std::vector<Point2> probes;
  for (int j = 0; j < top.grid.ny; j += 3) {
    for (int i = 0; i < top.grid.nx; i += 3) {
      if (!top.inside(i, j)) continue;
      const Point2 p = top.grid.node(i, j);
      if (disk.distance(p) >= 0.2 && disk.distance(p) < 0.25) probes.push_back(p);
    }
  }
  const SandwichBarrierReport s =
      barrier_sandwich_check([&top](const Point2& x) { return top.sample(x); }, 3, disk, probes, 0.25, 1e-3);
  CHECK(s.tested > 20);
  CHECK(s.passed());

  // Probes near the boundary report large error bars instead of hiding them.
  REQUIRE(res.report.probes.size() == 3);
  CHECK_FALSE(res.report.probes[2].reliable);
  CHECK(res.report.probes[2].error > res.report.probes[0].error);
}

TEST_CASE("grid, mask and sampling") {
  const Domain2D disk = make_disk(Point2::Zero(), 1.0);
  const ScalarField f = solve_cross_section_substitution(3, disk, 0.05).field;
  for (int j = 0; j < f.grid.ny; j += 5) {
    for (int i = 0; i < f.grid.nx; i += 5) {
      if (!f.inside(i, j)) continue;
      CHECK(f.sample(f.grid.node(i, j)) == f.at(i, j));
      CHECK(f.at(i, j) > 0);
    }
  }
  CHECK(code_of([&] { f.sample(Point2(0.999, 0.0)); }) == ErrorCode::OutsideWindow);
  CHECK(code_of([] { solve_cross_section(3, make_disk(Point2::Zero(), 0.05), 0.02); }) == ErrorCode::MaskTooCoarse);
}

TEST_CASE("smooth cutoff") {
  CHECK(smooth_cutoff(0.1, 0.2, 0.4).value == 1.0);
  CHECK(smooth_cutoff(0.5, 0.2, 0.4).value == 0.0);
  CHECK(smooth_cutoff(0.3, 0.2, 0.4).value == doctest::Approx(0.5));
  for (double r = 0.21; r < 0.4; r += 0.01) {
    const double e = 1e-6;
    const CutoffJet j = smooth_cutoff(r, 0.2, 0.4);
    CHECK(j.d1 == doctest::Approx((smooth_cutoff(r + e, 0.2, 0.4).value - smooth_cutoff(r - e, 0.2, 0.4).value) / (2 * e))
                      .epsilon(1e-5)
                      .scale(1e-3));
    CHECK(j.d2 == doctest::Approx((smooth_cutoff(r + e, 0.2, 0.4).d1 - smooth_cutoff(r - e, 0.2, 0.4).d1) / (2 * e))
                      .epsilon(1e-4)
                      .scale(1e-2));
  }
}
