#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace blowup {

using Point2 = Eigen::Vector2d;

struct Segment {
  Point2 a, b;
};
// Counterclockwise arc of a circle from angle `start` through angle `start + sweep`.
struct Arc {
  Point2 center;
  double radius = 0.0;
  double start = 0.0;
  double sweep = 0.0;
};
using BoundaryPiece = std::variant<Segment, Arc>;

// Bounded planar cross-section given by a strict containment predicate and its boundary pieces.
class Domain2D {
 public:
  std::string name;
  std::vector<BoundaryPiece> pieces;
  std::function<bool(const Point2&)> inside;
  Point2 lo, hi;  // bounding box

  bool contains(const Point2& x) const { return inside(x); }
  // Unsigned distance to the boundary.
  double distance(const Point2& x) const;
  // Positive inside, negative outside.
  double signed_distance(const Point2& x) const;
  Point2 nearest_point(const Point2& x) const;
  // Fraction t in (0, 1] with a + t (b - a) on the boundary, for a inside and b outside.
  double crossing(const Point2& a, const Point2& b) const;
};

Domain2D make_disk(const Point2& center, double radius);
// Simple polygon, vertices in either orientation.
Domain2D make_polygon(const std::vector<Point2>& vertices);
// Wedge of opening omega < pi with vertex at the origin and bisector along +y, closed by the disk
// centered at (0, D) that is tangent to both edges.
Domain2D make_ice_cream(double omega, double D);
// Region above the line through the origin at angle (pi - omega)/2 and inside the disk of radius rho
// through the origin whose tangent there makes opening omega with the line.
Domain2D make_line_arc(double omega, double rho);

}  // namespace blowup
