#include "blowup/closed_forms.hpp"

#include <cmath>
#include <memory>

namespace blowup {

namespace {

void require_dim(int n) {
  if (n < 3) fail(ErrorCode::InvalidArgument, "dimension must be at least 3");
}

}  // namespace

double SolutionHandle::operator()(const Vec& x) const {
  if (x.size() != dim || !contains(x)) {
    fail(ErrorCode::OutsideDomain, "evaluation of '" + tag + "' outside its domain");
  }
  return evaluator(x);
}

SolutionHandle ball_interior(int n, double r, const Vec& x0) {
  require_dim(n);
  if (!(r > 0) || x0.size() != n) fail(ErrorCode::InvalidArgument, "ball needs r > 0 and an n-vector center");
  const double b = blowup_exponent(n);
  SolutionHandle h;
  h.dim = n;
  h.tag = "ball_interior";
  h.contains = [x0, r](const Vec& x) { return (x - x0).squaredNorm() < r * r; };
  h.evaluator = [x0, r, b](const Vec& x) { return std::pow(2.0 * r / (r * r - (x - x0).squaredNorm()), b); };
  return h;
}

SolutionHandle ball_exterior(int n, double r, const Vec& x0) {
  require_dim(n);
  if (!(r > 0) || x0.size() != n) fail(ErrorCode::InvalidArgument, "ball needs r > 0 and an n-vector center");
  const double b = blowup_exponent(n);
  SolutionHandle h;
  h.dim = n;
  h.tag = "ball_exterior";
  h.contains = [x0, r](const Vec& x) { return (x - x0).squaredNorm() > r * r; };
  h.evaluator = [x0, r, b](const Vec& x) { return std::pow(2.0 * r / ((x - x0).squaredNorm() - r * r), b); };
  return h;
}

SolutionHandle half_space(int n) {
  Vec nu = Vec::Zero(n);
  nu[n - 1] = 1.0;
  SolutionHandle h = half_space(n, make_hyperplane(nu, Vec::Zero(n)));
  return h;
}

SolutionHandle half_space(int n, const Hyperplane& plane) {
  require_dim(n);
  if (plane.normal.size() != n) fail(ErrorCode::InvalidArgument, "hyperplane dimension mismatch");
  const double b = blowup_exponent(n);
  SolutionHandle h;
  h.dim = n;
  h.tag = "half_space";
  h.contains = [plane](const Vec& x) { return signed_distance_plane(x, plane) > 0; };
  h.evaluator = [plane, b](const Vec& x) { return std::pow(signed_distance_plane(x, plane), -b); };
  return h;
}

SolutionHandle operator+(const SolutionHandle& a, const SolutionHandle& b) {
  if (a.dim != b.dim) fail(ErrorCode::InvalidArgument, "handle dimensions differ");
  SolutionHandle h;
  h.dim = a.dim;
  h.tag = a.tag + "+" + b.tag;
  h.contains = [a, b](const Vec& x) { return a.contains(x) && b.contains(x); };
  h.evaluator = [a, b](const Vec& x) { return a.evaluator(x) + b.evaluator(x); };
  return h;
}

double pde_residual(const SolutionHandle& u, const Vec& x, double step) {
  if (!(step > 0)) fail(ErrorCode::InvalidArgument, "step must be positive");
  const int n = u.dim;
  const double u0 = u(x);
  double lap = 0.0;
  for (int i = 0; i < n; ++i) {
    Vec p1 = x, p2 = x, m1 = x, m2 = x;
    p1[i] += step;
    p2[i] += 2 * step;
    m1[i] -= step;
    m2[i] -= 2 * step;
    lap += (-u(p2) + 16.0 * u(p1) - 30.0 * u0 + 16.0 * u(m1) - u(m2)) / (12.0 * step * step);
  }
  return lap - nonlinear_coefficient(n) * std::pow(u0, nonlinear_power(n));
}

double relative_pde_residual(const SolutionHandle& u, const Vec& x, double step) {
  const int n = u.dim;
  return pde_residual(u, x, step) / (nonlinear_coefficient(n) * std::pow(u(x), nonlinear_power(n)));
}

SolutionHandle pullback_solution(double a, const SolutionHandle& v) {
  const double b = blowup_exponent(v.dim);
  SolutionHandle h;
  h.dim = v.dim;
  h.tag = "pullback(" + v.tag + ")";
  h.contains = [a, v](const Vec& x) {
    const double den = a * a + 2.0 * a * x[0] + x.squaredNorm();
    if (std::abs(den) < 1e-14 * a * a) return false;
    return v.contains(conformal_map(a, x));
  };
  h.evaluator = [a, v, b](const Vec& x) {
    return v.evaluator(conformal_map(a, x)) * std::pow(conformal_factor(a, x), b);
  };
  return h;
}

}  // namespace blowup
