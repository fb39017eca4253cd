#pragma once

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <string>
#include <vector>

#include "blowup/geometry.hpp"

namespace blowup {

// Increasing Dirichlet levels m_j = base * factor^j, j = 0..count-1.
struct LevelSchedule {
  double base = 10.0;
  double factor = 2.0;
  int count = 13;
  std::vector<double> levels() const;
};

enum class ProfileMethod {
  TruncationLevels,  // increasing boundary levels, each solved by damped Newton
  Substitution,      // q = g^{-2/(n-2)}, which vanishes linearly at the blow-up boundary
};

const char* to_string(ProfileMethod method);
ProfileMethod parse_profile_method(const std::string& text);

struct ProfileOptions {
  ProfileMethod method = ProfileMethod::TruncationLevels;
  LevelSchedule schedule;
  double newton_tol = 1e-11;
  int max_newton = 200;
  double window_fraction = 0.8;  // window keeps nodes with g < fraction * m_max
  bool extrapolate = true;       // geometric-tail limit of the last three levels
  bool keep_levels = true;       // store every level profile in the report
};

struct ProfileReport {
  std::vector<double> levels;
  std::vector<int> newton_iterations;
  std::vector<std::vector<double>> level_values;  // per level, full grid
  int picard_steps = 0;
  double final_residual = 0.0;
};

enum class ConeGeometry { Wedge, Zonal };

// Homogeneous solution r^{-(n-2)/2} g(theta) of a wedge (in coordinates 1-2) or a circular cone.
class ConeSolution {
 public:
  int dim = 0;
  ConeGeometry geometry = ConeGeometry::Wedge;
  double opening = 0.0;      // wedge opening or cone aperture
  double start_angle = 0.0;  // wedge: polar angle of the first face
  Vec axis;                  // zonal: unit axis (defaults to e_n)
  double h = 0.0;            // angular step
  std::vector<double> q;     // g^{-2/(n-2)} on theta_j = j h, j = 0..J
  double m_max = 0.0;        // final truncation level; zero for the substitution method
  double theta_lo = 0.0;
  double theta_hi = 0.0;
  ProfileMethod method = ProfileMethod::TruncationLevels;

  int J() const { return static_cast<int>(q.size()) - 1; }
  double beta() const { return 0.5 * (dim - 2); }
  // Grid value of g; +infinity is never produced, so endpoints with q = 0 are rejected.
  double g_node(int j) const;
  // Profile g at an angle inside the window.
  double g(double theta) const;
  // q and its first two derivatives; wedges extend oddly across both faces so that the
  // reference w = r q(theta) stays smooth slightly outside the cone.
  struct Jet {
    double q, dq, d2q;
  };
  Jet jet(double theta) const;
  // Angle of x relative to the first face (wedge) or the axis (zonal), and the radius.
  void polar(const Vec& x, double& r, double& theta) const;

  void build_interpolant();

 private:
  boost::math::interpolators::cardinal_cubic_b_spline<double> spline_;
  double spline_lo_ = 0.0;
  double spline_hi_ = 0.0;
};

ConeSolution solve_wedge_profile(int n, double omega, int J, const ProfileOptions& options = {},
                                 ProfileReport* report = nullptr);
ConeSolution solve_zonal_profile(int n, double aperture, int J, const ProfileOptions& options = {},
                                 ProfileReport* report = nullptr);

// Rotates a wedge solution so that its first face lies at polar angle `start_angle`.
ConeSolution with_start_angle(ConeSolution sol, double start_angle);

double eval_coneSolution(const ConeSolution& sol, const Vec& x);

// Active-plane cone of a wedge solution: dim 2, one normal for a half-plane, two otherwise.
ConeSpec wedge_cone(const ConeSolution& sol);
double eval_fV(const ConeSolution& sol, const Vec& d);

struct CompareStats {
  double sup_u = 0.0;      // sup |u1(A^{-1} x) / u2(x) - 1|
  double sup_f = 0.0;      // sup |f1(d) / f2(d) - 1|
  double norm_A = 0.0;     // ||A - I||
  double norm_N = 0.0;     // ||N1 - N2||
  double u_over_A = 0.0;
  double f_over_A = 0.0;
  double u_over_N = 0.0;
  double f_over_N = 0.0;
  std::size_t u_samples = 0;
  std::size_t f_samples = 0;
};

// A acts on the active plane (2x2). Samples cover the windows of both solutions.
CompareStats compare_cones(const ConeSolution& sol1, const ConeSolution& sol2, const Mat& A,
                           int samples = 400);
// Linear map of the plane fixing the first face and sending wedge sol1 onto wedge sol2.
Mat wedge_map(const ConeSolution& sol1, const ConeSolution& sol2);

std::string to_json(const ConeSolution& sol);
ConeSolution cone_solution_from_json(const std::string& text);
void save_cone_solution(const ConeSolution& sol, const std::string& path);
ConeSolution load_cone_solution(const std::string& path);

}  // namespace blowup
