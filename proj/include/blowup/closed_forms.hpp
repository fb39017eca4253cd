#pragma once

#include <functional>
#include <string>

#include "blowup/geometry.hpp"

namespace blowup {

// Exponent (n-2)/2 of the boundary blow-up d^{-(n-2)/2}.
inline double blowup_exponent(int n) { return 0.5 * (n - 2); }
// Coefficient n(n-2)/4 of the nonlinearity.
inline double nonlinear_coefficient(int n) { return 0.25 * n * (n - 2); }
// Power (n+2)/(n-2) of the nonlinearity.
inline double nonlinear_power(int n) { return static_cast<double>(n + 2) / (n - 2); }

// A positive solution (or comparison function) together with its open domain.
struct SolutionHandle {
  int dim = 0;
  std::string tag;
  std::function<bool(const Vec&)> contains;
  std::function<double(const Vec&)> evaluator;  // only called on points of the domain

  // Throws OutsideDomain off the domain; infinity is never returned.
  double operator()(const Vec& x) const;
};

SolutionHandle ball_interior(int n, double r, const Vec& x0);
SolutionHandle ball_exterior(int n, double r, const Vec& x0);
// Solution on {x_n > 0}.
SolutionHandle half_space(int n);
// Solution on the positive side of an arbitrary hyperplane.
SolutionHandle half_space(int n, const Hyperplane& plane);

// Pointwise sum on the intersection of the domains.
SolutionHandle operator+(const SolutionHandle& a, const SolutionHandle& b);

// Fourth-order central-difference Laplacian minus the nonlinearity.
double pde_residual(const SolutionHandle& u, const Vec& x, double step = 1e-3);
// Residual divided by the nonlinear term, the scale-free form used in tolerances.
double relative_pde_residual(const SolutionHandle& u, const Vec& x, double step = 1e-3);

// x -> v(T_a x) * lambda(x)^{(n-2)/2}.
SolutionHandle pullback_solution(double a, const SolutionHandle& v);

}  // namespace blowup
