#include "blowup/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blowup/errors.hpp"

namespace blowup {

namespace {

Point2 polar_unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

Point2 nearest_on(const Segment& s, const Point2& x) {
  const Point2 d = s.b - s.a;
  const double t = std::clamp((x - s.a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return s.a + t * d;
}

Point2 nearest_on(const Arc& arc, const Point2& x) {
  const Point2 rel = x - arc.center;
  const Point2 first = arc.center + arc.radius * polar_unit(arc.start);
  const Point2 last = arc.center + arc.radius * polar_unit(arc.start + arc.sweep);
  if (rel.norm() > 0) {
    double off = std::atan2(rel.y(), rel.x()) - arc.start;
    off -= 2.0 * M_PI * std::floor(off / (2.0 * M_PI));
    if (off <= arc.sweep) return arc.center + arc.radius * rel / rel.norm();
  }
  return (x - first).norm() <= (x - last).norm() ? first : last;
}

void fit_box(Domain2D& dom) {
  const double inf = std::numeric_limits<double>::infinity();
  dom.lo = Point2(inf, inf);
  dom.hi = Point2(-inf, -inf);
  auto take = [&](const Point2& p) {
    dom.lo = dom.lo.cwiseMin(p);
    dom.hi = dom.hi.cwiseMax(p);
  };
  for (const BoundaryPiece& piece : dom.pieces) {
    if (const auto* s = std::get_if<Segment>(&piece)) {
      take(s->a);
      take(s->b);
    } else {
      const Arc& a = std::get<Arc>(piece);
      const int steps = 720;
      for (int j = 0; j <= steps; ++j) take(a.center + a.radius * polar_unit(a.start + a.sweep * j / steps));
      // Exact extremes of the circle where the arc reaches them.
      for (int q = 0; q < 4; ++q) {
        const Point2 p = a.center + a.radius * polar_unit(0.5 * M_PI * q);
        if ((nearest_on(a, p) - p).norm() < 1e-12) take(p);
      }
    }
  }
}

}  // namespace

double Domain2D::distance(const Point2& x) const { return (x - nearest_point(x)).norm(); }

double Domain2D::signed_distance(const Point2& x) const {
  const double d = distance(x);
  return contains(x) ? d : -d;
}

Point2 Domain2D::nearest_point(const Point2& x) const {
  Point2 best = x;
  double best_d = std::numeric_limits<double>::infinity();
  for (const BoundaryPiece& piece : pieces) {
    const Point2 p = std::visit([&](const auto& s) { return nearest_on(s, x); }, piece);
    const double d = (p - x).norm();
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  }
  return best;
}

double Domain2D::crossing(const Point2& a, const Point2& b) const {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 64 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (contains(a + mid * (b - a))) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

Domain2D make_disk(const Point2& center, double radius) {
  if (!(radius > 0)) fail(ErrorCode::InvalidArgument, "disk radius must be positive");
  Domain2D dom;
  dom.name = "disk";
  dom.pieces.push_back(Arc{center, radius, 0.0, 2.0 * M_PI});
  dom.inside = [center, radius](const Point2& x) { return (x - center).norm() < radius; };
  fit_box(dom);
  return dom;
}

Domain2D make_polygon(const std::vector<Point2>& vertices) {
  if (vertices.size() < 3) fail(ErrorCode::InvalidArgument, "polygon needs at least three vertices");
  Domain2D dom;
  dom.name = "polygon";
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    dom.pieces.push_back(Segment{vertices[i], vertices[(i + 1) % vertices.size()]});
  }
  dom.inside = [vertices](const Point2& x) {
    bool in = false;
    const std::size_t m = vertices.size();
    for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
      const Point2& p = vertices[i];
      const Point2& q = vertices[j];
      if ((p.y() > x.y()) != (q.y() > x.y())) {
        const double xc = p.x() + (x.y() - p.y()) * (q.x() - p.x()) / (q.y() - p.y());
        if (x.x() < xc) in = !in;
      }
    }
    return in;
  };
  fit_box(dom);
  return dom;
}

Domain2D make_ice_cream(double omega, double D) {
  if (!(omega > 0) || !(omega < M_PI)) fail(ErrorCode::InvalidArgument, "opening must lie in (0, pi)");
  if (!(D > 0)) fail(ErrorCode::InvalidArgument, "cap distance must be positive");
  const double half = 0.5 * omega;
  const double a0 = 0.5 * M_PI - half;
  const double edge = D * std::cos(half);
  const Point2 t1 = edge * polar_unit(a0);
  const Point2 t2 = edge * polar_unit(a0 + omega);
  const Point2 c(0.0, D);
  const double rho = D * std::sin(half);
  Domain2D dom;
  dom.name = "ice-cream";
  dom.pieces.push_back(Segment{Point2::Zero(), t1});
  dom.pieces.push_back(Arc{c, rho, -half, M_PI + omega});
  dom.pieces.push_back(Segment{t2, Point2::Zero()});
  const Point2 n1(-std::sin(a0), std::cos(a0));
  const Point2 n2(std::sin(a0 + omega), -std::cos(a0 + omega));
  const double chord = t1.y();
  dom.inside = [=](const Point2& x) {
    if ((x - c).norm() < rho) return true;
    return n1.dot(x) > 0 && n2.dot(x) > 0 && x.y() < chord;
  };
  fit_box(dom);
  return dom;
}

Domain2D make_line_arc(double omega, double rho) {
  if (!(omega > 0) || !(omega < M_PI)) fail(ErrorCode::InvalidArgument, "opening must lie in (0, pi)");
  if (!(rho > 0)) fail(ErrorCode::InvalidArgument, "arc radius must be positive");
  const double a0 = 0.5 * (M_PI - omega);
  const Point2 dir = polar_unit(a0);
  const Point2 c = rho * polar_unit(0.5 * omega);
  const Point2 far = 2.0 * rho * std::cos(a0 - 0.5 * omega) * dir;
  const double start = std::atan2(far.y() - c.y(), far.x() - c.x());
  double sweep = std::atan2(-c.y(), -c.x()) - start;
  sweep -= 2.0 * M_PI * std::floor(sweep / (2.0 * M_PI));
  Domain2D dom;
  dom.name = "line-arc";
  dom.pieces.push_back(Segment{Point2::Zero(), far});
  dom.pieces.push_back(Arc{c, rho, start, sweep});
  const Point2 n1(-dir.y(), dir.x());
  dom.inside = [=](const Point2& x) { return n1.dot(x) > 0 && (x - c).norm() < rho; };
  fit_box(dom);
  return dom;
}

}  // namespace blowup
