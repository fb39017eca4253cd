#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "blowup/closed_forms.hpp"
#include "blowup/fixtures.hpp"
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

Vec v2(const Point2& p) {
  Vec v(2);
  v << p.x(), p.y();
  return v;
}

ProfileOptions substitution() {
  ProfileOptions o;
  o.method = ProfileMethod::Substitution;
  return o;
}

// Wedge of opening 2 pi / 3 with bisector +y, matching the straight-wedge fixture.
ConeSolution wedge_profile() {
  return with_start_angle(solve_wedge_profile(3, 2.0 * M_PI / 3.0, 2000, substitution()), M_PI / 6.0);
}

Domain2D wedge_triangle() {
  const double c = std::cos(M_PI / 6.0), s = std::sin(M_PI / 6.0);
  return make_polygon({Point2(0, 0), Point2(2 * c, 2 * s), Point2(-2 * c, 2 * s)});
}

}  // namespace

TEST_CASE("rate fits recover known power laws") {
  std::vector<double> s, e1, e2;
  for (double d = 0.005; d < 0.3; d *= 1.2) {
    s.push_back(d);
    e1.push_back(0.5 * d);
    e2.push_back(std::sqrt(d));
  }
  const RateFit a = fit_rate(s, e1, 0.01, 0.2);
  CHECK(a.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.intercept == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(a.constant() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(a.r2 == doctest::Approx(1.0).epsilon(1e-12));
  for (double x : a.s) CHECK((x >= 0.01 && x <= 0.2));
  CHECK(fit_rate(s, e2, 0.01, 0.2).slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(code_of([&] { fit_rate(s, e1, 0.25, 0.26); }) == ErrorCode::InsufficientSamples);
  CHECK(code_of([&] { fit_rate({0.1, 0.2, 0.3}, {0.0, 0.0, 0.0}, 0.0, 1.0); }) == ErrorCode::InsufficientSamples);
}

TEST_CASE("boundary rate of a synthetic first-order correction") {
  const Domain2D box = make_polygon({Point2(-1, 0), Point2(1, 0), Point2(1, 1), Point2(-1, 1)});
  const Ray ray{Point2(0, 0), Point2(0, 3)};
  for (int n : {3, 4}) {
    const double b = 0.5 * (n - 2);
    const auto u = [&, b](const Point2& x) {
      const double d = box.distance(x);
      return std::pow(d, -b) * (1 + 0.5 * d);
    };
    const RateFit f = boundary_rate(u, n, box, ray, 0.01, 0.2, 0.005);
    CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(f.constant() == doctest::Approx(0.5).epsilon(1e-9));
    const auto v = [&, b](const Point2& x) {
      const double d = box.distance(x);
      return std::pow(d, -b) * (1 + std::sqrt(d));
    };
    CHECK(boundary_rate(v, n, box, ray, 0.01, 0.2, 0.005).slope == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("corner rate against a perturbed cone solution") {
  const CornerChart chart = load_chart(resolve_data_path("fixtures/straight-wedge.yaml"));
  const ConeSolution prof = wedge_profile();
  for (double angle : {M_PI / 2, M_PI / 3, 2 * M_PI / 3}) {
    const Ray ray{Point2::Zero(), Point2(std::cos(angle), std::sin(angle))};
    const auto u = [&prof](const Point2& x) { return eval_coneSolution(prof, v2(x)) * (1 + 0.3 * x.norm()); };
    const CornerRate r = corner_rate(u, prof, chart, ray, 0.01, 0.2, 0.005);
    CHECK(r.distance_form.slope == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.map_form.slope == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.map_form.constant() == doctest::Approx(0.3).epsilon(1e-6));
    // The exact cone solution leaves only roundoff in both forms.
    const auto exact = [&prof](const Point2& x) { return eval_coneSolution(prof, v2(x)); };
    for (int j = 2; j <= 40; ++j) {
      const Point2 x = 0.005 * j * ray.direction;
      Vec d(2);
      for (int i = 0; i < 2; ++i) d[i] = signed_distance_graph(v2(x), chart, i);
      CHECK(std::abs(exact(x) / eval_fV(prof, d) - 1.0) < 1e-12);
      CHECK(std::abs(exact(x) / eval_coneSolution(prof, corner_map_T(chart, v2(x))) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("interior rays") {
  const ConeSolution prof = wedge_profile();
  const Domain2D tri = wedge_triangle();
  const auto u = [&prof](const Point2& x) { return eval_coneSolution(prof, v2(x)) * (1 + 0.3 * x.norm()); };
  const RateFit f = interior_ray_check(u, prof, tri, Point2::Zero(), 0.1, 0.05, 0.2, 0.01);
  CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(f.constant() == doctest::Approx(0.3).epsilon(1e-6));
  // No ray keeps a distance of 0.9 |x| from the faces of a 2 pi / 3 wedge.
  CHECK(code_of([&] { interior_ray_check(u, prof, tri, Point2::Zero(), 0.9, 0.05, 0.2, 0.01); }) ==
        ErrorCode::InsufficientSamples);
}

TEST_CASE("distance bounds") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(-1, 1);
  for (int n : {3, 4, 5}) {
    const double b = 0.5 * (n - 2);
    std::vector<Vec> pts;
    while (pts.size() < 500) {
      Vec x(n);
      for (int j = 0; j < n; ++j) x[j] = unit(rng);
      if (x.norm() < 0.999) pts.push_back(x);
    }
    const SolutionHandle u = ball_interior(n, 1.0, Vec::Zero(n));
    const auto dist = [](const Vec& x) { return 1.0 - x.norm(); };
    const BoundsReport rep = bounds_check(pts, [&](const Vec& x) { return u(x); }, dist, n, 1e-12);
    CHECK(rep.samples == 500);
    CHECK(rep.upper <= std::pow(2.0, b));
    CHECK(rep.lower >= 1.0);
    CHECK(code_of([&] { bounds_check(pts, [&](const Vec& x) { return 2 * u(x); }, dist, n, 1e-3); }) ==
          ErrorCode::BoundViolated);

    std::vector<Vec> up;
    for (const Vec& x : pts) up.push_back(x + Vec::Constant(n, 2.0));
    const SolutionHandle hs = half_space(n);
    const BoundsReport flat =
        bounds_check(up, [&](const Vec& x) { return hs(x); }, [n](const Vec& x) { return x[n - 1]; }, n, 1e-12);
    CHECK(flat.upper == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(flat.lower == doctest::Approx(1.0).epsilon(1e-14));
  }
  const BoundsReport cone = bounds_check(solve_wedge_profile(3, M_PI, 2000, substitution()), 1e-6);
  CHECK(cone.upper == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(cone.lower == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(bounds_check(wedge_profile(), 1e-6).upper <= std::sqrt(2.0));
}

TEST_CASE("anisotropic gradient bound") {
  const ConeSolution prof = wedge_profile();
  const AnisotropyReport a = anisotropic_check(prof, 1.0, 100.0, 21);
  const AnisotropyReport b = anisotropic_check(prof, 1.0, 100.0, 21, 5e-4);
  CHECK(a.ratios.size() == 42);
  CHECK(a.C > 0.0);
  CHECK(a.C < 10.0);
  CHECK(std::abs(b.C / a.C - 1.0) < 1e-2);
  CHECK(code_of([&] { anisotropic_check(prof, 2.0, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("difference bound") {
  const ConeSolution prof = wedge_profile();
  const DifferenceReport r = difference_bound_check(prof, {0.01, 0.02, 0.05});
  REQUIRE(r.constants.size() == 3);
  for (double c : r.constants) CHECK(c > 0.0);
  CHECK(r.spread < 2.0);
  // Along pure dilation x* = (1 + tau) x the constant tends to the homogeneity degree.
  const Vec x = v2(Point2(0.2, 1.0).normalized());
  for (double tau : {1e-3, 1e-4}) {
    const double ux = eval_coneSolution(prof, x);
    const double c = std::abs(ux - eval_coneSolution(prof, (1 + tau) * x)) / (tau * ux);
    CHECK(c == doctest::Approx(0.5).epsilon(tau));
  }
}

TEST_CASE("scaled derivative bound on a radial field") {
  // u = (2 / (1 - r^2))^{1/2} on the unit disk; the quantity has a closed form in r.
  const Domain2D disk = make_disk(Point2::Zero(), 1.0);
  const StencilSet S = build_stencils(disk, 0.005);
  ScalarField f;
  f.n = 3;
  f.grid = S.grid;
  f.mask = S.mask;
  f.u.assign(S.mask.size(), 0.0);
  double expected = 0.0;
  for (int j = 0; j < f.grid.ny; ++j) {
    for (int i = 0; i < f.grid.nx; ++i) {
      if (!f.inside(i, j)) continue;
      const Point2 p = f.grid.node(i, j);
      const double r = p.norm();
      f.u[f.grid.flat(i, j)] = oracle::ball_inside(3, 1.0, r);
      const double d = 1.0 - r;
      if (d < 0.05 || d > 0.2) continue;
      const double l1 = r / (1 - r * r), l2 = (1 + r * r) / std::pow(1 - r * r, 2);
      const double urr = l2 + l1 * l1, ur = l1;
      expected = std::max(expected, d * ur + d * d * std::hypot(urr, ur / r));
    }
  }
  const DerivativeReport rep = derivative_bound_check(f, disk, 0.05, 0.2);
  CHECK(rep.samples > 1000);
  CHECK(rep.C == doctest::Approx(expected).epsilon(1e-2));
  // Bounded up to the boundary: the quantity barely trends with d.
  CHECK(std::abs(rep.slope) < 0.1);
  CHECK(code_of([&] { derivative_bound_check(f, disk, 2.0, 3.0); }) == ErrorCode::InsufficientSamples);
}

TEST_CASE("level monotonicity measure") {
  CHECK(max_level_decrease(std::vector<std::vector<double>>{{1, 2}, {1, 3}, {2, 3}}) == 0.0);
  CHECK(max_level_decrease(std::vector<std::vector<double>>{{1, 2}, {1.5, 1.75}}) == doctest::Approx(0.25));
}
