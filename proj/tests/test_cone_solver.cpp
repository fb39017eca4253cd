#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "blowup/cone_solver.hpp"

using namespace blowup;

namespace {

Vec plane_point(int n, double r, double angle) {
  Vec x = Vec::Zero(n);
  x[0] = r * std::cos(angle);
  x[1] = r * std::sin(angle);
  return x;
}

ProfileOptions substitution() {
  ProfileOptions o;
  o.method = ProfileMethod::Substitution;
  return o;
}

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

}  // namespace

TEST_CASE("half-plane profile by truncation levels") {
  for (int n : {3, 4}) {
    const ConeSolution s = solve_wedge_profile(n, M_PI, 20000);
    CHECK(s.g(M_PI / 2) == doctest::Approx(1.0).epsilon(1e-3));
    if (n == 4) CHECK(s.g(M_PI / 6) == doctest::Approx(2.0).epsilon(1e-3));
  }
}

TEST_CASE("levels increase monotonically") {
  ProfileReport rep;
  solve_wedge_profile(3, 2.0, 2000, {}, &rep);
  REQUIRE(rep.level_values.size() == 13);
  for (std::size_t l = 1; l < rep.level_values.size(); ++l) {
    CHECK(rep.levels[l] > rep.levels[l - 1]);
    for (std::size_t j = 0; j < rep.level_values[l].size(); ++j) {
      CHECK(rep.level_values[l][j] >= rep.level_values[l - 1][j] - 1e-9);
    }
  }
  ProfileReport zrep;
  solve_zonal_profile(3, 1.0, 2000, {}, &zrep);
  for (std::size_t l = 1; l < zrep.level_values.size(); ++l) {
    for (std::size_t j = 0; j < zrep.level_values[l].size(); ++j) {
      CHECK(zrep.level_values[l][j] >= zrep.level_values[l - 1][j] - 1e-9);
    }
  }
}

TEST_CASE("zonal cap of aperture pi/2") {
  const ConeSolution s = solve_zonal_profile(3, M_PI / 2, 20000);
  CHECK(s.g(0.0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(s.g(M_PI / 3) == doctest::Approx(std::sqrt(2.0)).epsilon(2e-3));
  // g'(0) = 0 to discretization order.
  const double dg = (s.g(2 * s.h) - s.g(0.0)) / (2 * s.h);
  CHECK(std::abs(dg) < 1e-2);
  const ConeSolution q = solve_zonal_profile(3, M_PI / 2, 2000, substitution());
  CHECK(q.g(0.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(q.g(M_PI / 3) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("substitution profile matches the half-plane closed form") {
  for (int n : {3, 4, 5}) {
    const ConeSolution s = solve_wedge_profile(n, M_PI, 2000, substitution());
    const double b = 0.5 * (n - 2);
    for (double t : {0.1, 0.5, 1.0, M_PI / 2, 2.5, M_PI - 0.1}) {
      CHECK(s.g(t) == doctest::Approx(std::pow(std::sin(t), -b)).epsilon(1e-5));
    }
  }
}

TEST_CASE("grid convergence is second order") {
  const ProfileOptions o = substitution();
  const double omega = 2.0 * M_PI / 3.0;
  const ConeSolution a = solve_wedge_profile(3, omega, 500, o);
  const ConeSolution b = solve_wedge_profile(3, omega, 1000, o);
  const ConeSolution c = solve_wedge_profile(3, omega, 2000, o);
  double dab = 0, dbc = 0;
  for (double t = 0.2; t < omega - 0.2; t += 0.05) {
    dab = std::max(dab, std::abs(a.g(t) - b.g(t)));
    dbc = std::max(dbc, std::abs(b.g(t) - c.g(t)));
  }
  CHECK(dab / dbc > 3.0);
  CHECK(dab / dbc < 5.0);
}

TEST_CASE("window values are insensitive to the final level") {
  // Nodes within a few cells of a face keep an O(1) truncation imprint, so the check uses the band
  // at least 0.1 away from both faces.
  ProfileOptions o;
  const ConeSolution a = solve_wedge_profile(3, 2.0, 20000, o);
  o.schedule.count += 1;
  const ConeSolution b = solve_wedge_profile(3, 2.0, 20000, o);
  double worst = 0.0;
  for (double t = 0.1; t < 1.9; t += 0.01) worst = std::max(worst, std::abs(b.g(t) / a.g(t) - 1.0));
  CHECK(worst < 1e-4);
}

TEST_CASE("homogeneous evaluation") {
  const ConeSolution half = solve_wedge_profile(3, M_PI, 20000);
  CHECK(eval_coneSolution(half, plane_point(3, 1.0, M_PI / 2)) == doctest::Approx(1.0).epsilon(1e-3));

  const ConeSolution s = solve_wedge_profile(4, 2.0, 2000, substitution());
  const Vec x = plane_point(4, 0.7, 0.8);
  CHECK(eval_coneSolution(s, 4.0 * x) == doctest::Approx(0.25 * eval_coneSolution(s, x)).epsilon(1e-14));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int i = 0; i < 200; ++i) {
    const Vec y = plane_point(4, 0.2 + unit(rng), 0.05 + 1.9 * unit(rng));
    const double lambda = std::exp(4 * unit(rng) - 2);
    CHECK(eval_coneSolution(s, lambda * y) == doctest::Approx(eval_coneSolution(s, y) / lambda).epsilon(1e-12));
  }
  CHECK(code_of([&] { eval_coneSolution(s, plane_point(4, 1.0, 2.5)); }) == ErrorCode::OutsideWindow);
  CHECK(code_of([&] { eval_coneSolution(s, Vec::Zero(4)); }) == ErrorCode::OutsideWindow);
}

TEST_CASE("distance form of the cone solution") {
  SUBCASE("half-plane") {
    const ConeSolution s = solve_wedge_profile(3, M_PI, 2000, substitution());
    for (double d : {0.01, 0.3, 2.0}) {
      Vec v(1);
      v << d;
      CHECK(eval_fV(s, v) == doctest::Approx(std::pow(d, -0.5)).epsilon(1e-5));
    }
  }
  SUBCASE("symmetric wedge and scaling") {
    const ConeSolution s = solve_wedge_profile(3, 2.0 * M_PI / 3.0, 2000, substitution());
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    for (int i = 0; i < 100; ++i) {
      Vec d(2), e(2);
      d << unit(rng), unit(rng);
      e << d[1], d[0];
      CHECK(eval_fV(s, d) == doctest::Approx(eval_fV(s, e)).epsilon(1e-10));
      const double lambda = 1.0 / unit(rng);
      CHECK(eval_fV(s, lambda * d) == doctest::Approx(std::pow(lambda, -0.5) * eval_fV(s, d)).epsilon(1e-12));
      // Agrees with the point form at the recovered point.
      const ConeSpec cone = wedge_cone(s);
      const Vec x = cone.normals * cone.gram().inverse() * d;
      CHECK(eval_fV(s, d) == doctest::Approx(eval_coneSolution(s, x)).epsilon(1e-14));
    }
  }
  SUBCASE("inconsistent distances") {
    const ConeSolution s = solve_wedge_profile(3, 2.0, 2000, substitution());
    Vec d(2);
    d << -0.5, 0.5;
    CHECK(code_of([&] { eval_fV(s, d); }) == ErrorCode::InconsistentDistances);
  }
}

TEST_CASE("comparing cone solutions") {
  const ConeSolution s = solve_wedge_profile(3, M_PI / 2, 2000, substitution());
  const CompareStats same = compare_cones(s, s, Mat::Identity(2, 2));
  CHECK(same.sup_u == 0.0);
  CHECK(same.sup_f == 0.0);
  CHECK(same.u_over_A == 0.0);
  CHECK(same.f_over_N == 0.0);

  const CompareStats dil = compare_cones(s, s, 2.0 * Mat::Identity(2, 2));
  CHECK(dil.sup_f <= 1e-10);
  CHECK(dil.sup_u == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-12));

  std::vector<double> ratios;
  for (double eps : {0.01, 0.02, 0.05}) {
    const ConeSolution t = solve_wedge_profile(3, M_PI / 2 * (1 + eps), 2000, substitution());
    const Mat A = wedge_map(s, t);
    const CompareStats st = compare_cones(s, t, A);
    CHECK(st.norm_N > 0);
    ratios.push_back(st.u_over_N);
  }
  CHECK(*std::max_element(ratios.begin(), ratios.end()) / *std::min_element(ratios.begin(), ratios.end()) < 2.0);
}

TEST_CASE("upper bound on the unit circle") {
  const ConeSolution s = solve_wedge_profile(3, 2.0, 2000, substitution());
  double lower = 1e300;
  for (double t = s.theta_lo; t <= s.theta_hi; t += 0.01) {
    const double d = t < 1.0 ? std::sin(t) : std::sin(2.0 - t);
    const double v = std::sqrt(d) * s.g(t);
    CHECK(v <= std::sqrt(2.0) * (1 + 1e-6));
    lower = std::min(lower, v);
  }
  CHECK(lower > 0.5);
}

TEST_CASE("serialization round trip") {
  const ConeSolution s = with_start_angle(solve_wedge_profile(3, 2.0, 500, substitution()), 0.3);
  const ConeSolution back = cone_solution_from_json(to_json(s));
  CHECK(back.opening == s.opening);
  CHECK(back.start_angle == s.start_angle);
  CHECK(back.J() == s.J());
  for (double t : {0.1, 1.0, 1.9}) CHECK(back.g(t) == doctest::Approx(s.g(t)).epsilon(1e-13));
  const std::string path = (std::filesystem::temp_directory_path() / "blowup_profile_test.json").string();
  save_cone_solution(s, path);
  CHECK(load_cone_solution(path).g(1.0) == doctest::Approx(s.g(1.0)).epsilon(1e-13));
  std::remove(path.c_str());
}

TEST_CASE("argument validation") {
  CHECK(code_of([] { solve_wedge_profile(3, 0.0, 500); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { solve_wedge_profile(3, 7.0, 500); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { solve_wedge_profile(2, 1.0, 500); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { solve_wedge_profile(3, 1.0, 10); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { solve_zonal_profile(3, 3.5, 500); }) == ErrorCode::InvalidArgument);
}
