#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "blowup/errors.hpp"

namespace blowup {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Gram determinants at or below this count as linearly dependent normals.
inline constexpr double kDegenerateTol = 1e-10;

struct Hyperplane {
  Vec normal;
  Vec anchor;
};

// Rejects normals whose length differs from one by more than 1e-12.
Hyperplane make_hyperplane(const Vec& normal, const Vec& anchor);
double signed_distance_plane(const Vec& x, const Hyperplane& plane);

// Sign vectors in {-1,+1}^k are stored as bit masks: bit i set means l_i = +1.
using SignMask = std::uint32_t;
SignMask sign_mask(const std::vector<int>& signs);
SignMask parse_sign_mask(const std::string& text);  // e.g. "+-+"
std::string format_sign_mask(SignMask mask, int k);
inline SignMask all_plus(int k) { return (k >= 32) ? ~SignMask{0} : ((SignMask{1} << k) - 1); }

struct ConeSpec {
  int dim = 0;
  Mat normals;  // dim x k, one unit inner normal per column
  std::set<SignMask> components;
  Vec vertex;
  int k() const { return static_cast<int>(normals.cols()); }
  Mat gram() const { return normals.transpose() * normals; }
};

ConeSpec make_cone(const Mat& normals, const std::set<SignMask>& components, int dim,
                   const Vec& vertex = Vec());
ConeSpec make_cone(const Mat& normals, const std::vector<std::vector<int>>& components, int dim,
                   const Vec& vertex = Vec());

// Componentwise sign of <nu_i, x - vertex>; OnBoundary when some value is below tol.
SignMask sign_vector(const ConeSpec& cone, const Vec& x, double tol = 1e-12);
bool membership(const ConeSpec& cone, const Vec& x, double tol = 1e-12);

// Unit vectors mu_j with <nu_l, mu_j> = 0 (l != j) and <nu_j, mu_j> > 0; columns of the result.
Mat edge_directions(const ConeSpec& cone);
double sigma(const ConeSpec& cone);

// Orthonormal completion of the column span of normals, picked by largest residual pivot.
Mat complement_normals(const Mat& normals);

// --- boundary graphs -----------------------------------------------------------------------

struct PlaneGraph {
  Vec slope;  // f(x') = offset + slope . (x' - base')
};
struct CircleArcGraph {
  Vec center;     // full n-vector of the sphere center
  double radius;  // sphere radius
  int branch;     // +1: lower branch (region above is the ball side), -1: upper branch
};
struct PolyGraph {
  // f(x') = offset + sum_j sum_p coeffs[j][p-1] (x'_j - base'_j)^p
  std::vector<std::vector<double>> coeffs;
};

class GraphFunction {
 public:
  GraphFunction() = default;
  static GraphFunction plane(const Vec& base, double offset, const Vec& slope);
  static GraphFunction circle_arc(const Vec& center, double radius, int branch);
  static GraphFunction poly(const Vec& base, double offset, std::vector<std::vector<double>> coeffs);

  double value(const Vec& xp) const;
  Vec gradient(const Vec& xp) const;
  Mat hessian(const Vec& xp) const;
  // Circle arcs only exist over the horizontal extent of their sphere.
  bool defined_at(const Vec& xp) const;
  const char* kind_name() const;
  const std::variant<PlaneGraph, CircleArcGraph, PolyGraph>& kind() const { return kind_; }
  const Vec& base() const { return base_; }
  double offset() const { return offset_; }

 private:
  std::variant<PlaneGraph, CircleArcGraph, PolyGraph> kind_;
  Vec base_;
  double offset_ = 0.0;
};

struct CornerChart {
  int dim = 0;
  Vec x0;
  std::vector<GraphFunction> graphs;
  double M = 0.0;       // bound on |f_i - tangent plane| / |x' - x0'|^2
  double R = 0.0;       // validity radius
  std::set<SignMask> components;
  Mat normals;          // dim x k inner normals at x0, derived from the graphs
  double theta0 = 0.0;  // aperture of the interior circular cone used by the shifted-cone check
  int k() const { return static_cast<int>(graphs.size()); }
};

CornerChart make_chart(int dim, const Vec& x0, std::vector<GraphFunction> graphs, double M, double R,
                       const std::set<SignMask>& components, double theta0);

// Signed distance to the i-th graph surface; positive on the side x_n > f_i(x').
double signed_distance_graph(const Vec& x, const CornerChart& chart, int i);
// Generic nearest-point search (grid scan plus Newton), used for polynomial graphs and as a
// cross-check of the closed forms.
double signed_distance_graph_search(const Vec& x, const CornerChart& chart, int i);

bool chart_contains(const CornerChart& chart, const Vec& x);
ConeSpec tangent_cone(const CornerChart& chart);

// Full dim x dim normal matrix: chart normals followed by the complement normals.
Mat full_normal_matrix(const CornerChart& chart);
Vec corner_map_T(const CornerChart& chart, const Vec& x);
// Inverse of corner_map_T by Newton iteration on the residual T(x) - y.
Vec corner_map_inverse(const CornerChart& chart, const Vec& y, double tol = 1e-13);

struct SandwichReport {
  bool passed = true;
  double shift = 0.0;
  std::size_t samples = 0;
  std::size_t upper_tested = 0;  // points of the raised cone inside the ball
  std::size_t lower_tested = 0;  // points of the domain inside the ball
  std::size_t upper_violations = 0;
  std::size_t lower_violations = 0;
};

SandwichReport cone_sandwich_report(const CornerChart& chart, double r, std::size_t samples = 20000,
                                    std::uint64_t seed = 20240601, double shift_scale = 1.0);
bool cone_sandwich_check(const CornerChart& chart, double r);

// --- spheres and conformal maps -------------------------------------------------------------

double circle_chord(double R1, double R2, double alpha);

struct SphereIntersection {
  Vec q;
  double chord = 0.0;
};
SphereIntersection spheres_second_intersection(const Vec& p, const Mat& normals, double r);
// Guaranteed lower bound r * sqrt(det N^T N) / 2^(k-2) on the chord.
double sphere_chord_bound(const Mat& normals, double r);

Vec conformal_map(double a, const Vec& x);
double conformal_factor(double a, const Vec& x);

// Central-difference Jacobian of a vector map.
Mat numeric_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double step);

}  // namespace blowup
