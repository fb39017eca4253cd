#include "blowup/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "blowup/closed_forms.hpp"

namespace blowup {

namespace {

Vec to_vec(const Point2& p) {
  Vec v(2);
  v << p.x(), p.y();
  return v;
}

struct LineFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  if (sxx == 0.0) fail(ErrorCode::InsufficientSamples, "samples share a single abscissa");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += r * r;
  }
  f.r2 = syy > 0 ? 1.0 - ssr / syy : 1.0;
  return f;
}

std::string describe(const Vec& x) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (long i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

PlanarFunction field_function(const ScalarField& field) {
  return [&field](const Point2& x) { return field.sample(x); };
}

Point2 polar_unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

}  // namespace

double RateFit::constant() const { return std::exp(intercept); }

RateFit fit_rate(const std::vector<double>& s, const std::vector<double>& e, double lo, double hi) {
  if (s.size() != e.size()) fail(ErrorCode::InvalidArgument, "sample arrays differ in length");
  RateFit fit;
  fit.lo = lo;
  fit.hi = hi;
  std::vector<double> ls, le;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0) || !(e[i] > 0) || s[i] < lo || s[i] > hi) continue;
    fit.s.push_back(s[i]);
    fit.e.push_back(e[i]);
    ls.push_back(std::log(s[i]));
    le.push_back(std::log(e[i]));
  }
  if (ls.size() < 3) fail(ErrorCode::InsufficientSamples, "fewer than three positive samples in the window");
  const LineFit f = least_squares(ls, le);
  fit.slope = f.slope;
  fit.intercept = f.intercept;
  fit.r2 = f.r2;
  return fit;
}

RateFit boundary_rate(const PlanarFunction& u, int n, const Domain2D& domain, const Ray& ray, double lo, double hi,
                      double step) {
  const Point2 dir = ray.direction.normalized();
  const double beta = blowup_exponent(n);
  std::vector<double> s, e;
  for (int j = 1;; ++j) {
    const Point2 x = ray.origin + j * step * dir;
    if (!domain.contains(x)) break;
    const double d = domain.distance(x);
    if (d > hi) continue;
    if (d < lo) continue;
    s.push_back(d);
    e.push_back(std::abs(std::pow(d, beta) * u(x) - 1.0));
  }
  return fit_rate(s, e, lo, hi);
}

RateFit boundary_rate(const ScalarField& field, const Domain2D& domain, const Ray& ray, double lo, double hi) {
  return boundary_rate(field_function(field), field.n, domain, ray, lo, hi, field.grid.h);
}

CornerRate corner_rate(const PlanarFunction& u, const ConeSolution& profile, const CornerChart& chart, const Ray& ray,
                       double lo, double hi, double step) {
  if (chart.dim != 2) fail(ErrorCode::InvalidArgument, "corner rate works in the cross-section plane");
  const Point2 dir = ray.direction.normalized();
  const Point2 x0(chart.x0[0], chart.x0[1]);
  std::vector<double> s, e_dist, e_map;
  for (int j = static_cast<int>(std::ceil(lo / step - 1e-9)); j * step <= hi * (1 + 1e-12); ++j) {
    const double t = j * step;
    const Point2 x = x0 + t * dir;
    const Vec xv = to_vec(x);
    const double val = u(x);
    Vec d(chart.k());
    for (int i = 0; i < chart.k(); ++i) d[i] = signed_distance_graph(xv, chart, i);
    const double fv = eval_fV(profile, d);
    const double uv = eval_coneSolution(profile, corner_map_T(chart, xv) - chart.x0);
    s.push_back(t);
    e_dist.push_back(std::abs(val / fv - 1.0));
    e_map.push_back(std::abs(val / uv - 1.0));
  }
  return {fit_rate(s, e_dist, lo, hi), fit_rate(s, e_map, lo, hi)};
}

CornerRate corner_rate(const ScalarField& field, const ConeSolution& profile, const CornerChart& chart, const Ray& ray,
                       double lo, double hi) {
  return corner_rate(field_function(field), profile, chart, ray, lo, hi, field.grid.h);
}

RateFit interior_ray_check(const PlanarFunction& u, const ConeSolution& profile, const Domain2D& domain,
                           const Point2& corner, double delta, double lo, double hi, double step, int rays) {
  if (profile.geometry != ConeGeometry::Wedge) fail(ErrorCode::InvalidArgument, "interior rays need a wedge profile");
  std::vector<double> s;
  for (int j = static_cast<int>(std::ceil(lo / step - 1e-9)); j * step <= hi * (1 + 1e-12); ++j) s.push_back(j * step);
  std::vector<double> e(s.size(), -1.0);
  for (int k = 0; k < rays; ++k) {
    const Point2 dir = polar_unit(profile.start_angle + profile.opening * (k + 0.5) / rays);
    std::vector<double> along;
    for (double t : s) {
      const Point2 x = corner + t * dir;
      if (!domain.contains(x) || domain.distance(x) <= delta * t) break;
      try {
        along.push_back(std::abs(u(x) / eval_coneSolution(profile, to_vec(x - corner)) - 1.0));
      } catch (const Error& err) {
        if (err.code() != ErrorCode::OutsideWindow) throw;
        break;
      }
    }
    if (along.size() != s.size()) continue;
    for (std::size_t i = 0; i < s.size(); ++i) e[i] = std::max(e[i], along[i]);
  }
  return fit_rate(s, e, lo, hi);
}

BoundsReport bounds_check(const std::vector<Vec>& points, const std::function<double(const Vec&)>& u,
                          const std::function<double(const Vec&)>& dist, int n, double tol) {
  const double beta = blowup_exponent(n);
  BoundsReport rep;
  rep.upper_limit = std::pow(2.0, beta) * (1.0 + tol);
  rep.lower = std::numeric_limits<double>::infinity();
  for (const Vec& x : points) {
    const double val = std::pow(dist(x), beta) * u(x);
    if (!(val > 0) || val > rep.upper_limit) {
      fail(ErrorCode::BoundViolated, "d^{(n-2)/2} u = " + std::to_string(val) + " at " + describe(x));
    }
    rep.upper = std::max(rep.upper, val);
    rep.lower = std::min(rep.lower, val);
    ++rep.samples;
  }
  if (rep.samples == 0) fail(ErrorCode::InsufficientSamples, "no points for the bounds check");
  return rep;
}

BoundsReport bounds_check(const ScalarField& field, const Domain2D& domain, double tol, double min_dist) {
  std::vector<Vec> pts;
  for (int j = 0; j < field.grid.ny; ++j) {
    for (int i = 0; i < field.grid.nx; ++i) {
      if (!field.inside(i, j)) continue;
      const Point2 p = field.grid.node(i, j);
      if (domain.distance(p) >= min_dist) pts.push_back(to_vec(p));
    }
  }
  return bounds_check(
      pts, [&](const Vec& x) { return field.sample(Point2(x[0], x[1])); },
      [&](const Vec& x) { return domain.distance(Point2(x[0], x[1])); }, field.n, tol);
}

double wedge_boundary_distance(const ConeSolution& profile, const Vec& x) {
  const Point2 p(x[0], x[1]);
  double best = std::numeric_limits<double>::infinity();
  for (double angle : {profile.start_angle, profile.start_angle + profile.opening}) {
    const Point2 e = polar_unit(angle);
    const double along = p.dot(e);
    best = std::min(best, along >= 0 ? std::abs(p.x() * e.y() - p.y() * e.x()) : p.norm());
  }
  return best;
}

BoundsReport bounds_check(const ConeSolution& profile, double tol, int samples) {
  std::vector<Vec> pts;
  const double lo = profile.theta_lo, hi = profile.theta_hi;
  for (int s = 0; s < samples; ++s) {
    const double theta = lo + (hi - lo) * (s + 0.5) / samples;
    if (profile.geometry == ConeGeometry::Wedge) {
      pts.push_back(to_vec(polar_unit(profile.start_angle + theta)));
    } else {
      Vec x = Vec::Zero(profile.dim);
      x[0] = std::sin(theta);
      x[profile.dim - 1] = std::cos(theta);
      pts.push_back(x);
    }
  }
  auto dist = [&](const Vec& x) {
    if (profile.geometry == ConeGeometry::Wedge) return wedge_boundary_distance(profile, x);
    double r = 0, theta = 0;
    profile.polar(x, r, theta);
    const double gap = profile.opening - theta;
    return gap <= M_PI / 2 ? r * std::sin(gap) : r;
  };
  return bounds_check(pts, [&](const Vec& x) { return eval_coneSolution(profile, x); }, dist, profile.dim, tol);
}

AnisotropyReport anisotropic_check(const ConeSolution& profile, double ratio_min, double ratio_max, int samples,
                                   double fd_scale) {
  const ConeSpec cone = wedge_cone(profile);
  if (cone.k() != 2) fail(ErrorCode::InvalidArgument, "anisotropic check needs a two-face wedge");
  if (!(ratio_min >= 1) || !(ratio_max > ratio_min)) fail(ErrorCode::InvalidArgument, "need 1 <= ratio_min < ratio_max");
  const Mat mu = edge_directions(cone);
  const Mat G = cone.gram();
  const std::array<double, 2> face_angles{profile.start_angle, profile.start_angle + profile.opening};
  auto face_distance = [&](const Vec& x, int i) {
    const Point2 e = polar_unit(face_angles[static_cast<std::size_t>(i)]);
    const Point2 p(x[0], x[1]);
    return p.dot(e) >= 0 ? std::abs(p.x() * e.y() - p.y() * e.x()) : p.norm();
  };
  AnisotropyReport rep;
  for (int s = 0; s < samples; ++s) {
    const double ratio = ratio_min * std::pow(ratio_max / ratio_min, samples > 1 ? double(s) / (samples - 1) : 0.0);
    for (int near = 0; near < 2; ++near) {
      Vec d(2);
      d[near] = 1.0;
      d[1 - near] = ratio;
      Vec x = cone.normals * G.ldlt().solve(d);
      x /= x.norm();
      const double d0 = face_distance(x, 0), d1 = face_distance(x, 1);
      const double step = fd_scale * std::min(d0, d1);
      const double ux = eval_coneSolution(profile, x);
      double q = 0.0;
      for (int i = 0; i < 2; ++i) {
        const Vec m = mu.col(i);
        const double deriv = (eval_coneSolution(profile, x + step * m) - eval_coneSolution(profile, x - step * m)) / (2 * step);
        q = std::max(q, (i == 0 ? d0 : d1) * std::abs(deriv) / ux);
      }
      rep.ratios.push_back(std::max(d0, d1) / std::min(d0, d1));
      rep.scaled.push_back(q);
      rep.C = std::max(rep.C, q);
    }
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
    lx.push_back(std::log(rep.ratios[i]));
    ly.push_back(std::log(rep.scaled[i]));
  }
  const LineFit f = least_squares(lx, ly);
  rep.slope = f.slope;
  rep.r2 = f.r2;
  return rep;
}

DifferenceReport difference_bound_check(const ConeSolution& profile, const std::vector<double>& taus, int pairs,
                                        std::uint64_t seed) {
  const ConeSpec cone = wedge_cone(profile);
  if (cone.k() != 2) fail(ErrorCode::InvalidArgument, "difference check needs a two-face wedge");
  const Mat mu = edge_directions(cone);
  const Eigen::PartialPivLU<Mat> muT(mu.transpose());
  DifferenceReport rep;
  rep.taus = taus;
  for (double tau : taus) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0), sym(-1.0, 1.0);
    double C = 0.0;
    for (int p = 0; p < pairs; ++p) {
      const double theta = profile.theta_lo + (profile.theta_hi - profile.theta_lo) * unit(rng);
      const Vec x = to_vec(polar_unit(profile.start_angle + theta));
      Vec a(2);
      for (int i = 0; i < 2; ++i) a[i] = sym(rng) * tau * std::abs(x.dot(mu.col(i)));
      const Vec xs = x - muT.solve(a);
      try {
        const double ux = eval_coneSolution(profile, x);
        const double us = eval_coneSolution(profile, xs);
        C = std::max(C, std::abs(ux - us) / (tau * ux));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::OutsideWindow) throw;
      }
    }
    rep.constants.push_back(C);
  }
  const auto [mn, mx] = std::minmax_element(rep.constants.begin(), rep.constants.end());
  rep.spread = *mn > 0 ? *mx / *mn : std::numeric_limits<double>::infinity();
  return rep;
}

DerivativeReport derivative_bound_check(const ScalarField& field, const Domain2D& domain, double d_lo, double d_hi) {
  const GridSpec& g = field.grid;
  const double h = g.h;
  DerivativeReport rep;
  std::vector<double> ld, lq;
  for (int j = 1; j + 1 < g.ny; ++j) {
    for (int i = 1; i + 1 < g.nx; ++i) {
      bool full = true;
      for (int b = -1; b <= 1 && full; ++b)
        for (int a = -1; a <= 1 && full; ++a) full = field.inside(i + a, j + b);
      if (!full) continue;
      const double d = domain.distance(g.node(i, j));
      if (d < d_lo || d > d_hi) continue;
      const double u0 = field.at(i, j);
      const double ux = (field.at(i + 1, j) - field.at(i - 1, j)) / (2 * h);
      const double uy = (field.at(i, j + 1) - field.at(i, j - 1)) / (2 * h);
      const double uxx = (field.at(i + 1, j) - 2 * u0 + field.at(i - 1, j)) / (h * h);
      const double uyy = (field.at(i, j + 1) - 2 * u0 + field.at(i, j - 1)) / (h * h);
      const double uxy =
          (field.at(i + 1, j + 1) - field.at(i + 1, j - 1) - field.at(i - 1, j + 1) + field.at(i - 1, j - 1)) / (4 * h * h);
      const double hess = std::sqrt(uxx * uxx + uyy * uyy + 2 * uxy * uxy);
      const double q = (d * std::hypot(ux, uy) + d * d * hess) / u0;
      rep.C = std::max(rep.C, q);
      ++rep.samples;
      ld.push_back(std::log(d));
      lq.push_back(std::log(q));
    }
  }
  if (rep.samples < 3) fail(ErrorCode::InsufficientSamples, "no interior nodes in the distance band");
  rep.slope = least_squares(ld, lq).slope;
  return rep;
}

SandwichBarrierReport barrier_sandwich_check(const PlanarFunction& u, int n, const Domain2D& domain,
                                             const std::vector<Point2>& probes, double radius, double tol) {
  SandwichBarrierReport rep;
  rep.worst_upper = rep.worst_lower = -std::numeric_limits<double>::infinity();
  for (const Point2& x : probes) {
    if (!domain.contains(x)) continue;
    const Point2 p = domain.nearest_point(x);
    const double dx = (x - p).norm();
    if (dx <= 0 || dx >= radius) continue;
    const Point2 nu = (x - p) / dx;
    const Point2 qi = p + radius * nu;
    const Point2 qe = p - radius * nu;
    const double slack = 1e-12 * radius;
    if (!domain.contains(qi) || domain.distance(qi) < radius - slack) continue;
    if (domain.contains(qe) || domain.distance(qe) < radius - slack) continue;
    // The cross-section sits in a cylinder, so balls centered in the plane bound u from both sides.
    auto lift = [n](const Point2& p) {
      Vec v = Vec::Zero(n);
      v[0] = p.x();
      v[1] = p.y();
      return v;
    };
    const Vec xv = lift(x);
    const double upper = ball_interior(n, radius, lift(qi))(xv);
    const double lower = ball_exterior(n, radius, lift(qe))(xv);
    double val = 0.0;
    try {
      val = u(x);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OutsideWindow) throw;
      continue;
    }
    ++rep.tested;
    rep.worst_upper = std::max(rep.worst_upper, val / upper - 1.0);
    rep.worst_lower = std::max(rep.worst_lower, 1.0 - val / lower);
    if (val > upper * (1 + tol) || val < lower * (1 - tol)) ++rep.violations;
  }
  return rep;
}

double max_level_decrease(const std::vector<std::vector<double>>& levels) {
  double worst = 0.0;
  for (std::size_t l = 1; l < levels.size(); ++l) {
    for (std::size_t i = 0; i < levels[l].size(); ++i) worst = std::max(worst, levels[l - 1][i] - levels[l][i]);
  }
  return worst;
}

double max_level_decrease(const std::vector<ScalarField>& fields) {
  std::vector<std::vector<double>> values;
  for (const ScalarField& f : fields) values.push_back(f.u);
  return max_level_decrease(values);
}

}  // namespace blowup
