#pragma once

// Independent reference computations for the unit tests. None of these call the library code they
// are used to check.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

// (2r / (r^2 - |x|^2))^{(n-2)/2}, written out from the closed form.
inline double ball_inside(int n, double r, double dist_to_center) {
  return std::pow(2.0 * r / (r * r - dist_to_center * dist_to_center), 0.5 * (n - 2));
}

inline double ball_outside(int n, double r, double dist_to_center) {
  return std::pow(2.0 * r / (dist_to_center * dist_to_center - r * r), 0.5 * (n - 2));
}

// Plain bisection on [a, b] with f(a) f(b) <= 0.
inline double bisect(const std::function<double(double)>& f, double a, double b, double tol = 1e-15) {
  double fa = f(a);
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    const double m = 0.5 * (a + b), fm = f(m);
    if ((fa <= 0) == (fm <= 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// Chord between the two crossings of circles of radii R1, R2 through the origin whose inner normals
// there meet at angle alpha, by scanning the first circle for the second root.
inline double chord_by_scan(double R1, double R2, double alpha) {
  const Eigen::Vector2d c1(R1, 0.0), c2 = R2 * Eigen::Vector2d(std::cos(alpha), std::sin(alpha));
  auto point = [&](double t) { return Eigen::Vector2d(c1 + R1 * Eigen::Vector2d(std::cos(t), std::sin(t))); };
  auto f = [&](double t) { return (point(t) - c2).squaredNorm() - R2 * R2; };
  const int scan = 20000;
  const double lo = -M_PI + 1e-7, width = 2 * M_PI - 2e-7;
  for (int i = 0; i < scan; ++i) {
    const double a = lo + width * i / scan, b = lo + width * (i + 1) / scan;
    if (f(a) * f(b) <= 0) return point(bisect(f, a, b)).norm();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// Distance from x to the graph of a scalar function of one variable, by dense sampling plus
// golden-section refinement.
inline double distance_to_graph(const Eigen::Vector2d& x, const std::function<double(double)>& f, double lo, double hi) {
  auto d2 = [&](double t) { return (Eigen::Vector2d(t, f(t)) - x).squaredNorm(); };
  const int samples = 20000;
  double best_t = lo, best = d2(lo);
  for (int i = 1; i <= samples; ++i) {
    const double t = lo + (hi - lo) * i / samples;
    if (d2(t) < best) {
      best = d2(t);
      best_t = t;
    }
  }
  double a = std::max(lo, best_t - (hi - lo) / samples), b = std::min(hi, best_t + (hi - lo) / samples);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (d2(c) < d2(d)) b = d;
    else a = c;
  }
  return std::sqrt(d2(0.5 * (a + b)));
}

// Ordinary least squares slope of y against x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

// Radial profile of the disk cross-section: u'' + u'/rho = c u^p on [0, 1) with blow-up at 1, by
// shooting on u(0) with RK4 integration until blow-up. Returns u at the requested radii.
inline std::vector<double> disk_profile_by_shooting(int n, const std::vector<double>& radii) {
  const double c = 0.25 * n * (n - 2), p = (n + 2.0) / (n - 2.0);
  // Integrates from the center; returns the blow-up radius (or +inf) and fills values at radii.
  auto shoot = [&](double u0, std::vector<double>* out) {
    const double h = 1e-5;
    double r = 1e-8, u = u0 + 0.25 * c * std::pow(u0, p) * r * r, v = 0.5 * c * std::pow(u0, p) * r;
    std::size_t next = 0;
    auto rhs = [&](double rr, double uu, double vv, double& du, double& dv) {
      du = vv;
      dv = c * std::pow(uu, p) - vv / rr;
    };
    while (r < 2.0) {
      double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
      rhs(r, u, v, k1u, k1v);
      rhs(r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v, k2u, k2v);
      rhs(r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v, k3u, k3v);
      rhs(r + h, u + h * k3u, v + h * k3v, k4u, k4v);
      const double un = u + h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
      const double vn = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
      while (out && next < radii.size() && radii[next] <= r + h) {
        const double s = (radii[next] - r) / h;
        out->push_back((1 - s) * u + s * un);
        ++next;
      }
      r += h;
      u = un;
      v = vn;
      if (!std::isfinite(u) || u > 1e6) return r;
    }
    return std::numeric_limits<double>::infinity();
  };
  // Larger u(0) blows up sooner; bisect for blow-up at radius one.
  double lo = 0.1, hi = 10.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (shoot(mid, nullptr) > 1.0) lo = mid;
    else hi = mid;
  }
  std::vector<double> out;
  shoot(0.5 * (lo + hi), &out);
  return out;
}

}  // namespace oracle
