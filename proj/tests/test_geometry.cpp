#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "blowup/fixtures.hpp"
#include "blowup/geometry.hpp"
#include "oracles.hpp"

using namespace blowup;

namespace {

using Signs = std::vector<std::vector<int>>;

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

Vec v3(double a, double b, double c) {
  Vec x(3);
  x << a, b, c;
  return x;
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

CornerChart fixture_chart(const std::string& name) { return load_chart(resolve_data_path("fixtures/" + name + ".yaml")); }

}  // namespace

TEST_CASE("signed distance to a plane") {
  const Hyperplane P = make_hyperplane(v3(0, 0, 1), Vec::Zero(3));
  CHECK(signed_distance_plane(v3(0, 0, 2), P) == doctest::Approx(2.0));
  CHECK(signed_distance_plane(v3(0, 0, -2), P) == doctest::Approx(-2.0));
  const Hyperplane Q = make_hyperplane(v2(1, 1) / std::sqrt(2.0), Vec::Zero(2));
  CHECK(signed_distance_plane(v2(1, 1), Q) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(code_of([] { make_hyperplane(v2(1, 1), Vec::Zero(2)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("signed distance to graphs") {
  SUBCASE("flat graph reduces to the plane distance") {
    const CornerChart chart =
        make_chart(2, Vec::Zero(2), {GraphFunction::poly(Vec::Zero(1), 0.0, {{0.0}})}, 0.0, 1.0, {all_plus(1)}, 0.5);
    CHECK(signed_distance_graph(v2(0, 0.3), chart, 0) == doctest::Approx(0.3));
    CHECK(signed_distance_graph_search(v2(0, 0.3), chart, 0) == doctest::Approx(0.3).epsilon(1e-12));
  }
  SUBCASE("circle arc through the origin, along the inner normal") {
    const double rho = 2.0;
    const CornerChart chart =
        make_chart(2, Vec::Zero(2), {GraphFunction::circle_arc(v2(0, rho), rho, 1)}, 1.0 / rho, 1.0, {all_plus(1)}, 0.5);
    for (double t : {0.01, 0.1, 0.3}) CHECK(signed_distance_graph(v2(0, t), chart, 0) == doctest::Approx(t).epsilon(1e-13));
    CHECK(signed_distance_graph(v2(0, -0.1), chart, 0) == doctest::Approx(-0.1).epsilon(1e-13));
  }
  SUBCASE("point on the graph") {
    const CornerChart chart = fixture_chart("line-arc");
    const Vec on = v2(0.1, 0.1 / std::sqrt(3.0));
    CHECK(std::abs(signed_distance_graph(on, chart, 0)) < 1e-14);
  }
  SUBCASE("closed forms agree with the generic search and with dense sampling") {
    const CornerChart chart = fixture_chart("line-arc");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> box(-0.08, 0.08);
    const Vec c = v2(0.5, std::sqrt(3.0) / 2);
    const auto arc = [&](double t) { return c[1] - std::sqrt(1.0 - (t - c[0]) * (t - c[0])); };
    for (int i = 0; i < 40; ++i) {
      const Vec x = v2(box(rng), box(rng) + 0.05);
      const double d = signed_distance_graph(x, chart, 1);
      CHECK(signed_distance_graph_search(x, chart, 1) == doctest::Approx(d).epsilon(1e-10));
      const double ref = oracle::distance_to_graph(Eigen::Vector2d(x[0], x[1]), arc, -0.4, 0.4);
      CHECK(std::abs(d) == doctest::Approx(ref).epsilon(1e-9));
    }
  }
  SUBCASE("polynomial graph by search against dense sampling") {
    const CornerChart chart =
        make_chart(2, Vec::Zero(2), {GraphFunction::poly(Vec::Zero(1), 0.0, {{0.2, 1.0}})}, 1.0, 1.0, {all_plus(1)}, 0.5);
    for (const Vec& x : {v2(0.1, 0.2), v2(-0.2, 0.05), v2(0.05, -0.1)}) {
      const double d = signed_distance_graph(x, chart, 0);
      const double ref = oracle::distance_to_graph(Eigen::Vector2d(x[0], x[1]), [](double t) { return 0.2 * t + t * t; }, -1, 1);
      CHECK(std::abs(d) == doctest::Approx(ref).epsilon(1e-9));
      CHECK((d > 0) == (x[1] > 0.2 * x[0] + x[0] * x[0]));
    }
  }
  SUBCASE("projection outside the chart window") {
    const CornerChart chart = fixture_chart("straight-wedge");
    CHECK(code_of([&] { signed_distance_graph(v2(3.0, 0.0), chart, 0); }) == ErrorCode::NoProjection);
  }
}

TEST_CASE("cone construction and validation") {
  SUBCASE("first quadrant") {
    const ConeSpec cone = make_cone(Mat::Identity(2, 2), Signs{{+1, +1}}, 2);
    CHECK(membership(cone, v2(1, 2)));
    CHECK_FALSE(membership(cone, v2(-1, -1)));
    CHECK_FALSE(membership(cone, v2(1, -1)));
    CHECK(code_of([&] { membership(cone, v2(0, 1)); }) == ErrorCode::OnBoundary);
  }
  SUBCASE("four-component cone") {
    const ConeSpec cone = load_cone(resolve_data_path("fixtures/four-component-cone.yaml"));
    CHECK(cone.components.size() == 4);
    // A point with sign vector (-1, -1, +1) lies outside.
    const Mat N = cone.normals;
    const Vec target = v3(-1, -1, 1);
    const Vec x = N.transpose().colPivHouseholderQr().solve(target);
    CHECK(sign_vector(cone, x) == parse_sign_mask("--+"));
    CHECK_FALSE(membership(cone, x));
    const Vec y = N.transpose().colPivHouseholderQr().solve(v3(-1, 1, 1));
    CHECK(membership(cone, y));
  }
  SUBCASE("component sets that violate the necessary conditions") {
    CHECK(code_of([] { make_cone(Mat::Identity(2, 2), Signs{{-1, -1}}, 2); }) == ErrorCode::InvalidComponents);
    CHECK(code_of([] { make_cone(Mat::Identity(2, 2), Signs{{+1, +1}, {-1, -1}}, 2); }) == ErrorCode::InvalidComponents);
    // (-1,+1) present but (+1,+1) implied by upward closure is fine; missing all-plus is not.
    CHECK(code_of([] { make_cone(Mat::Identity(2, 2), Signs{{-1, +1}}, 2); }) == ErrorCode::InvalidComponents);
  }
  SUBCASE("dependent normals") {
    Mat N(2, 2);
    const double t = 1e-7;
    N << 0, std::sin(t), 1, std::cos(t);
    CHECK(code_of([&] { make_cone(N, Signs{{+1, +1}}, 2); }) == ErrorCode::DegenerateNormals);
  }
  SUBCASE("sign masks round trip") {
    CHECK(format_sign_mask(parse_sign_mask("+-+"), 3) == "+-+");
    CHECK(sign_mask({+1, -1, +1}) == parse_sign_mask("+-+"));
  }
}

TEST_CASE("tangent cones of charts") {
  SUBCASE("straight chart keeps its planes") {
    const CornerChart chart = fixture_chart("straight-wedge");
    const ConeSpec cone = tangent_cone(chart);
    const double s = std::sqrt(3.0) / 2;
    CHECK(cone.normals(0, 0) == doctest::Approx(-0.5));
    CHECK(cone.normals(1, 0) == doctest::Approx(s));
    CHECK(cone.normals(0, 1) == doctest::Approx(0.5));
    CHECK(cone.normals(1, 1) == doctest::Approx(s));
  }
  SUBCASE("graphs 0 and -t + t^2") {
    const CornerChart chart = make_chart(
        2, Vec::Zero(2),
        {GraphFunction::plane(Vec::Zero(1), 0.0, Vec::Zero(1)), GraphFunction::poly(Vec::Zero(1), 0.0, {{-1.0, 1.0}})},
        1.0, 0.5, {all_plus(2)}, 0.3);
    // Second graph x_2 = -t + t^2 has tangent x_2 = -x_1; the region above both is {x_2 > 0, x_2 > -x_1}.
    const ConeSpec cone = tangent_cone(chart);
    CHECK(membership(cone, v2(1, 0.5)));
    CHECK(membership(cone, v2(-0.5, 1)));
    CHECK_FALSE(membership(cone, v2(-1, 0.5)));
    CHECK(cone.normals(0, 1) == doctest::Approx(1 / std::sqrt(2.0)));
  }
  SUBCASE("graphs 0 and t + t^2 bound the wedge between x_2 = 0 and x_2 = x_1") {
    const CornerChart chart = make_chart(
        2, Vec::Zero(2),
        {GraphFunction::plane(Vec::Zero(1), 0.0, Vec::Zero(1)), GraphFunction::poly(Vec::Zero(1), 0.0, {{1.0, 1.0}})},
        1.0, 0.5, {all_plus(2)}, 0.3);
    const ConeSpec cone = tangent_cone(chart);
    CHECK(cone.normals.col(0).isApprox(v2(0, 1)));
    CHECK(cone.normals.col(1).isApprox(v2(-1, 1) / std::sqrt(2.0)));
    CHECK(membership(cone, v2(1, 1.5)));
    CHECK(membership(cone, v2(-1, 0.5)));
    CHECK_FALSE(membership(cone, v2(1, 0.5)));
    CHECK_FALSE(membership(cone, v2(-1, -0.5)));
  }
  SUBCASE("disk complement gives a half-plane") {
    const CornerChart chart =
        make_chart(2, Vec::Zero(2), {GraphFunction::circle_arc(v2(0, -1), 1.0, -1)}, 1.0, 0.5, {all_plus(1)}, 0.5);
    const ConeSpec cone = tangent_cone(chart);
    CHECK(cone.k() == 1);
    CHECK(cone.normals.col(0).isApprox(v2(0, 1)));
  }
}

TEST_CASE("edge directions and sigma") {
  CHECK(edge_directions(make_cone(Mat::Identity(3, 3), Signs{{1, 1, 1}}, 3)).isApprox(Mat::Identity(3, 3)));
  const double w = 2.0;
  Mat N(2, 2);
  N << 0, std::sin(w), 1, -std::cos(w);
  const Mat mu = edge_directions(make_cone(N, Signs{{1, 1}}, 2));
  CHECK(mu.col(0).isApprox(v2(std::cos(w), std::sin(w))));
  CHECK(N.col(0).dot(mu.col(0)) > 0);
  CHECK(std::abs(N.col(1).dot(mu.col(0))) < 1e-14);

  CHECK(sigma(make_cone(Mat::Identity(3, 3), Signs{{1, 1, 1}}, 3)) == doctest::Approx(1.0));
  Mat H(2, 2);
  H << 1, 0.5, 0, std::sqrt(0.75);
  CHECK(sigma(make_cone(H, Signs{{1, 1}}, 2)) == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("circle chords") {
  CHECK(circle_chord(1, 1, M_PI / 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(circle_chord(1, 1, M_PI / 3) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(circle_chord(1, 2, 1e-9) < 1e-8);
  CHECK(code_of([] { circle_chord(1, 1, 0.0); }) == ErrorCode::BadAngle);
  CHECK(code_of([] { circle_chord(1, 1, M_PI); }) == ErrorCode::BadAngle);
  for (auto [a, b, t] : {std::tuple{0.3, 2.0, 0.4}, {1.5, 0.7, 2.9}, {1.0, 1.0, 1.0}}) {
    CHECK(circle_chord(a, b, t) == doctest::Approx(oracle::chord_by_scan(a, b, t)).epsilon(1e-10));
  }
}

TEST_CASE("second intersection of spheres") {
  const SphereIntersection s = spheres_second_intersection(Vec::Zero(2), Mat::Identity(2, 2), 1.0);
  CHECK(s.q.isApprox(v2(1, 1)));
  CHECK(s.chord == doctest::Approx(std::sqrt(2.0)));
  CHECK(sphere_chord_bound(Mat::Identity(2, 2), 1.0) == doctest::Approx(1.0));

  Mat one(3, 1);
  one << 0, 0.6, 0.8;
  const SphereIntersection a = spheres_second_intersection(v3(1, 2, 3), one, 0.5);
  CHECK(a.q.isApprox(v3(1, 2, 3) + one.col(0)));
  CHECK(a.chord == doctest::Approx(1.0));
}

TEST_CASE("conformal map and factor") {
  const double a = 1.5;
  CHECK(conformal_map(a, v3(a, 0, 0)).norm() < 1e-15);
  CHECK(conformal_map(a, Vec::Zero(3)).isApprox(v3(-a, 0, 0)));
  CHECK(conformal_map(a, v3(-a + 1e-6, 0, 0)).norm() > 1e5);
  CHECK(code_of([&] { conformal_map(a, v3(-a, 0, 0)); }) == ErrorCode::Pole);
  CHECK(conformal_factor(a, Vec::Zero(3)) == doctest::Approx(2.0));
  CHECK(conformal_factor(a, v3(a, 0, 0)) == doctest::Approx(0.5));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> box(-2, 2);
  for (int i = 0; i < 50; ++i) {
    const Vec x = v3(box(rng), box(rng), box(rng));
    if (a * a + 2 * a * x[0] + x.squaredNorm() < 0.5) continue;
    const Mat J = numeric_jacobian([a](const Vec& y) { return conformal_map(a, y); }, x, 1e-5);
    const double lam = conformal_factor(a, x);
    CHECK((J.transpose() * J - lam * lam * Mat::Identity(3, 3)).norm() <= 1e-6);
  }
}

TEST_CASE("corner map") {
  SUBCASE("identity on a straight chart") {
    const CornerChart chart = fixture_chart("straight-wedge");
    for (const Vec& x : {v2(0.01, 0.1), v2(-0.05, 0.2), v2(0.1, 0.07)}) CHECK((corner_map_T(chart, x) - x).norm() < 1e-14);
  }
  SUBCASE("curved chart: distances are preserved and T is close to the identity") {
    const CornerChart chart = fixture_chart("line-arc");
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> radius(0.005, 0.1), angle(0.6, 2.0);
    double worst_ratio = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double r = radius(rng), t = angle(rng);
      const Vec x = v2(r * std::cos(t), r * std::sin(t));
      const Vec T = corner_map_T(chart, x);
      for (int k = 0; k < 2; ++k) {
        const Hyperplane P = make_hyperplane(chart.normals.col(k), chart.x0);
        CHECK(signed_distance_plane(T, P) == doctest::Approx(signed_distance_graph(x, chart, k)).epsilon(1e-10).scale(1e-3));
      }
      worst_ratio = std::max(worst_ratio, (T - x).norm() / (r * r));
      CHECK((corner_map_inverse(chart, T) - x).norm() < 1e-8);
    }
    CHECK(worst_ratio < 10.0 * chart.M);
  }
}

TEST_CASE("shifted-cone sandwich") {
  CHECK(cone_sandwich_check(fixture_chart("straight-wedge"), 0.1));
  CHECK(cone_sandwich_check(fixture_chart("straight-wedge"), 0.4));
  const CornerChart chart = fixture_chart("line-arc");
  CHECK(cone_sandwich_check(chart, 0.1));
  const SandwichReport tight = cone_sandwich_report(chart, 0.1, 20000, 1, std::sin(chart.theta0) / 10.0);
  CHECK_FALSE(tight.passed);

  SUBCASE("sampling oracle on the line and arc corner") {
    const double r = 0.1, shift = chart.M * r * r / std::sin(chart.theta0);
    const Eigen::Vector2d c(0.5, std::sqrt(3.0) / 2), nu1(-0.5, std::sqrt(3.0) / 2), nu2 = c;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> box(-r, r);
    int tested = 0, bad = 0;
    while (tested < 20000) {
      const Eigen::Vector2d x(box(rng), box(rng));
      if (x.norm() >= r) continue;
      ++tested;
      const bool in_domain = x[1] > x[0] / std::sqrt(3.0) && (x - c).norm() < 1.0;
      const Eigen::Vector2d up = x - Eigen::Vector2d(0, shift), down = x + Eigen::Vector2d(0, shift);
      if (nu1.dot(up) > 0 && nu2.dot(up) > 0 && !in_domain) ++bad;
      if (in_domain && !(nu1.dot(down) > 0 && nu2.dot(down) > 0)) ++bad;
    }
    CHECK(bad == 0);
  }
}
