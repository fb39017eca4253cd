#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "blowup/cone_solver.hpp"
#include "blowup/domain.hpp"
#include "blowup/field_solver.hpp"
#include "blowup/geometry.hpp"

namespace blowup {

using PlanarFunction = std::function<double(const Point2&)>;

// Least-squares line through (log s, log e) over s in [lo, hi] with e > 0.
struct RateFit {
  std::vector<double> s, e;  // samples actually used
  double slope = 0.0;
  double intercept = 0.0;  // log of the fitted constant
  double r2 = 0.0;
  double lo = 0.0, hi = 0.0;
  double constant() const;
};

RateFit fit_rate(const std::vector<double>& s, const std::vector<double>& e, double lo, double hi);

struct Ray {
  Point2 origin;
  Point2 direction;  // normalized on use
};

// |d^{(n-2)/2} u - 1| against the boundary distance d at points origin + t dir, t = step, 2 step, ...
RateFit boundary_rate(const PlanarFunction& u, int n, const Domain2D& domain, const Ray& ray, double lo, double hi,
                      double step);
RateFit boundary_rate(const ScalarField& field, const Domain2D& domain, const Ray& ray, double lo, double hi);

struct CornerRate {
  RateFit distance_form;  // |u / f_V(d_1, ..., d_k) - 1|
  RateFit map_form;       // |u / u_V(T x) - 1|
};

// Samples origin + t dir with the ray starting at the chart corner. The profile must be oriented
// like the chart's tangent cone.
CornerRate corner_rate(const PlanarFunction& u, const ConeSolution& profile, const CornerChart& chart, const Ray& ray,
                       double lo, double hi, double step);
CornerRate corner_rate(const ScalarField& field, const ConeSolution& profile, const CornerChart& chart, const Ray& ray,
                       double lo, double hi);

// Largest |u / u_V - 1| at each radius |x - x0| = step, 2 step, ... in [lo, hi], fitted against the
// radius. Of `rays` rays spread across the tangent cone, only those whose every sample satisfies
// dist(x, boundary) > delta |x - x0| and can be evaluated take part.
RateFit interior_ray_check(const PlanarFunction& u, const ConeSolution& profile, const Domain2D& domain,
                           const Point2& corner, double delta, double lo, double hi, double step, int rays = 17);

struct BoundsReport {
  bool passed = true;
  std::size_t samples = 0;
  double upper = 0.0;        // max d^{(n-2)/2} u
  double lower = 0.0;        // min d^{(n-2)/2} u, the realized C^{-1}
  double upper_limit = 0.0;  // 2^{(n-2)/2} (1 + tol)
};

// Throws BoundViolated (naming the offending point) when d^{(n-2)/2} u exceeds 2^{(n-2)/2}(1 + tol)
// or is not positive.
BoundsReport bounds_check(const std::vector<Vec>& points, const std::function<double(const Vec&)>& u,
                          const std::function<double(const Vec&)>& dist, int n, double tol);
BoundsReport bounds_check(const ScalarField& field, const Domain2D& domain, double tol, double min_dist);
BoundsReport bounds_check(const ConeSolution& profile, double tol, int samples = 400);

// Distance from x to the boundary of the wedge of a profile.
double wedge_boundary_distance(const ConeSolution& profile, const Vec& x);

struct AnisotropyReport {
  std::vector<double> ratios;  // dist_max / dist_min per sample
  std::vector<double> scaled;  // max_i dist(x, F_i) |d_{mu_i} u| / u per sample
  double C = 0.0;
  double slope = 0.0;  // trend of log scaled against log ratio
  double r2 = 0.0;
};

// Samples on the unit circle of a two-face wedge with anisotropy ratios in [ratio_min, ratio_max],
// both faces taken in turn. The central-difference step is fd_scale times the smaller face distance.
AnisotropyReport anisotropic_check(const ConeSolution& profile, double ratio_min, double ratio_max, int samples = 41,
                                   double fd_scale = 1e-3);

struct DifferenceReport {
  std::vector<double> taus;
  std::vector<double> constants;  // max |u(x) - u(x*)| / (tau u(x)) per tau
  double spread = 0.0;            // max / min of the constants
};

// Pairs with |<x - x*, mu_i>| <= tau |<x, mu_i>| for every edge direction, x on the unit circle.
DifferenceReport difference_bound_check(const ConeSolution& profile, const std::vector<double>& taus, int pairs = 2000,
                                        std::uint64_t seed = 7);

struct DerivativeReport {
  std::size_t samples = 0;
  double C = 0.0;      // max (d |Du| + d^2 |D^2 u|) / u
  double slope = 0.0;  // trend of the scaled quantity against d
};

// Central differences at nodes whose 3x3 neighborhood is inside the mask and with d in [d_lo, d_hi].
DerivativeReport derivative_bound_check(const ScalarField& field, const Domain2D& domain, double d_lo, double d_hi);

struct SandwichBarrierReport {
  std::size_t tested = 0;
  std::size_t violations = 0;
  double worst_upper = 0.0;  // max u / (interior barrier) - 1
  double worst_lower = 0.0;  // max 1 - u / (exterior barrier)
  bool passed() const { return tested > 0 && violations == 0; }
};

// Ball barriers tangent at the nearest boundary point: v_{r,q'} <= u <= u_{r,q} up to relative tol.
// Probes whose tangent disks do not fit are skipped.
SandwichBarrierReport barrier_sandwich_check(const PlanarFunction& u, int n, const Domain2D& domain,
                                             const std::vector<Point2>& probes, double radius, double tol);

// Largest decrease between successive level fields (zero when monotone).
double max_level_decrease(const std::vector<ScalarField>& fields);
double max_level_decrease(const std::vector<std::vector<double>>& levels);

}  // namespace blowup
