#include "blowup/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace blowup {

namespace {

void require_unit(const Vec& v, const char* what) {
  if (v.size() == 0 || std::abs(v.norm() - 1.0) > 1e-12) {
    fail(ErrorCode::InvalidArgument, std::string(what) + " must be a unit vector");
  }
}

void require_independent(const Mat& normals) {
  const Mat gram = normals.transpose() * normals;
  if (gram.determinant() <= kDegenerateTol) {
    fail(ErrorCode::DegenerateNormals, "det(N^T N) is at or below the degeneracy tolerance");
  }
}

Vec head(const Vec& x) { return x.head(x.size() - 1); }

}  // namespace

Hyperplane make_hyperplane(const Vec& normal, const Vec& anchor) {
  require_unit(normal, "hyperplane normal");
  if (anchor.size() != normal.size()) {
    fail(ErrorCode::InvalidArgument, "hyperplane anchor dimension mismatch");
  }
  return {normal, anchor};
}

double signed_distance_plane(const Vec& x, const Hyperplane& plane) {
  return plane.normal.dot(x - plane.anchor);
}

SignMask sign_mask(const std::vector<int>& signs) {
  if (signs.size() >= 32) fail(ErrorCode::InvalidArgument, "too many sign entries");
  SignMask mask = 0;
  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (signs[i] == 1) {
      mask |= SignMask{1} << i;
    } else if (signs[i] != -1) {
      fail(ErrorCode::InvalidArgument, "sign entries must be +1 or -1");
    }
  }
  return mask;
}

SignMask parse_sign_mask(const std::string& text) {
  std::vector<int> signs;
  for (char c : text) {
    if (c == '+') signs.push_back(1);
    else if (c == '-') signs.push_back(-1);
    else if (c != ' ' && c != ',') fail(ErrorCode::InvalidArgument, "bad sign vector '" + text + "'");
  }
  return sign_mask(signs);
}

std::string format_sign_mask(SignMask mask, int k) {
  std::string out;
  for (int i = 0; i < k; ++i) out.push_back((mask >> i) & 1u ? '+' : '-');
  return out;
}

ConeSpec make_cone(const Mat& normals, const std::set<SignMask>& components, int dim, const Vec& vertex) {
  const int k = static_cast<int>(normals.cols());
  if (dim < 2 || normals.rows() != dim) fail(ErrorCode::InvalidArgument, "normal dimension mismatch");
  if (k < 1 || k > dim || k > 31) fail(ErrorCode::InvalidArgument, "need 1 <= k <= dim normals");
  for (int i = 0; i < k; ++i) require_unit(normals.col(i), "cone normal");
  require_independent(normals);

  const SignMask full = all_plus(k);
  for (SignMask l : components) {
    if (l > full) fail(ErrorCode::InvalidComponents, "sign vector longer than the number of normals");
  }
  if (!components.count(full)) fail(ErrorCode::InvalidComponents, "L must contain (+1,...,+1)");
  if (components.count(0)) fail(ErrorCode::InvalidComponents, "L must not contain (-1,...,-1)");
  for (SignMask l : components) {
    for (int i = 0; i < k; ++i) {
      if (!components.count(l | (SignMask{1} << i))) {
        fail(ErrorCode::InvalidComponents,
             "L is not upward closed at " + format_sign_mask(l, k));
      }
    }
  }

  ConeSpec cone;
  cone.dim = dim;
  cone.normals = normals;
  cone.components = components;
  cone.vertex = vertex.size() == 0 ? Vec::Zero(dim) : vertex;
  if (cone.vertex.size() != dim) fail(ErrorCode::InvalidArgument, "vertex dimension mismatch");
  return cone;
}

ConeSpec make_cone(const Mat& normals, const std::vector<std::vector<int>>& components, int dim,
                   const Vec& vertex) {
  std::set<SignMask> masks;
  for (const auto& l : components) {
    if (static_cast<long>(l.size()) != normals.cols()) {
      fail(ErrorCode::InvalidComponents, "sign vector length differs from k");
    }
    masks.insert(sign_mask(l));
  }
  return make_cone(normals, masks, dim, vertex);
}

SignMask sign_vector(const ConeSpec& cone, const Vec& x, double tol) {
  const Vec s = cone.normals.transpose() * (x - cone.vertex);
  SignMask mask = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (std::abs(s[i]) < tol) fail(ErrorCode::OnBoundary, "point lies on a bounding hyperplane");
    if (s[i] > 0) mask |= SignMask{1} << i;
  }
  return mask;
}

bool membership(const ConeSpec& cone, const Vec& x, double tol) {
  return cone.components.count(sign_vector(cone, x, tol)) > 0;
}

Mat edge_directions(const ConeSpec& cone) {
  if (cone.k() != cone.dim) fail(ErrorCode::InvalidArgument, "edge directions need k = n");
  require_independent(cone.normals);
  Mat mu = cone.normals.transpose().inverse();
  for (int j = 0; j < mu.cols(); ++j) {
    mu.col(j).normalize();
    if (cone.normals.col(j).dot(mu.col(j)) < 0) mu.col(j) = -mu.col(j);
  }
  return mu;
}

double sigma(const ConeSpec& cone) {
  require_independent(cone.normals);
  Eigen::SelfAdjointEigenSolver<Mat> eig(cone.gram());
  return 1.0 / eig.eigenvalues().minCoeff();
}

Mat complement_normals(const Mat& normals) {
  const int n = static_cast<int>(normals.rows());
  const int k = static_cast<int>(normals.cols());
  require_independent(normals);
  Mat P = Mat::Identity(n, n) - normals * (normals.transpose() * normals).inverse() * normals.transpose();
  Mat out(n, n - k);
  for (int c = 0; c < n - k; ++c) {
    int best = 0;
    double best_norm = -1.0;
    for (int j = 0; j < n; ++j) {
      const double v = P.col(j).norm();
      if (v > best_norm + 1e-14) {
        best_norm = v;
        best = j;
      }
    }
    Vec v = P.col(best) / best_norm;
    out.col(c) = v;
    P -= v * v.transpose();
  }
  return out;
}

// --- graphs ----------------------------------------------------------------------------------

GraphFunction GraphFunction::plane(const Vec& base, double offset, const Vec& slope) {
  if (slope.size() != base.size()) fail(ErrorCode::InvalidArgument, "plane graph dimension mismatch");
  GraphFunction g;
  g.kind_ = PlaneGraph{slope};
  g.base_ = base;
  g.offset_ = offset;
  return g;
}

GraphFunction GraphFunction::circle_arc(const Vec& center, double radius, int branch) {
  if (radius <= 0 || (branch != 1 && branch != -1)) {
    fail(ErrorCode::InvalidArgument, "circle arc needs radius > 0 and branch +-1");
  }
  GraphFunction g;
  g.kind_ = CircleArcGraph{center, radius, branch};
  g.base_ = head(center);
  g.offset_ = center[center.size() - 1];
  return g;
}

GraphFunction GraphFunction::poly(const Vec& base, double offset, std::vector<std::vector<double>> coeffs) {
  if (static_cast<long>(coeffs.size()) != base.size()) {
    fail(ErrorCode::InvalidArgument, "poly graph needs one coefficient list per coordinate");
  }
  GraphFunction g;
  g.kind_ = PolyGraph{std::move(coeffs)};
  g.base_ = base;
  g.offset_ = offset;
  return g;
}

const char* GraphFunction::kind_name() const {
  switch (kind_.index()) {
    case 0: return "plane";
    case 1: return "circle-arc";
    default: return "poly-coef";
  }
}

bool GraphFunction::defined_at(const Vec& xp) const {
  if (const auto* arc = std::get_if<CircleArcGraph>(&kind_)) {
    return (xp - head(arc->center)).norm() < arc->radius;
  }
  return true;
}

double GraphFunction::value(const Vec& xp) const {
  if (const auto* p = std::get_if<PlaneGraph>(&kind_)) return offset_ + p->slope.dot(xp - base_);
  if (const auto* arc = std::get_if<CircleArcGraph>(&kind_)) {
    const double rho2 = arc->radius * arc->radius - (xp - base_).squaredNorm();
    if (rho2 <= 0) fail(ErrorCode::OutsideDomain, "circle arc graph evaluated beyond its extent");
    return offset_ - arc->branch * std::sqrt(rho2);
  }
  const auto& poly = std::get<PolyGraph>(kind_);
  double v = offset_;
  for (std::size_t j = 0; j < poly.coeffs.size(); ++j) {
    const double t = xp[j] - base_[j];
    double tp = t;
    for (double c : poly.coeffs[j]) {
      v += c * tp;
      tp *= t;
    }
  }
  return v;
}

Vec GraphFunction::gradient(const Vec& xp) const {
  if (const auto* p = std::get_if<PlaneGraph>(&kind_)) return p->slope;
  if (const auto* arc = std::get_if<CircleArcGraph>(&kind_)) {
    const Vec t = xp - base_;
    const double rho2 = arc->radius * arc->radius - t.squaredNorm();
    if (rho2 <= 0) fail(ErrorCode::OutsideDomain, "circle arc graph evaluated beyond its extent");
    return arc->branch * t / std::sqrt(rho2);
  }
  const auto& poly = std::get<PolyGraph>(kind_);
  Vec g = Vec::Zero(xp.size());
  for (std::size_t j = 0; j < poly.coeffs.size(); ++j) {
    const double t = xp[j] - base_[j];
    double tp = 1.0;
    for (std::size_t p = 0; p < poly.coeffs[j].size(); ++p) {
      g[j] += static_cast<double>(p + 1) * poly.coeffs[j][p] * tp;
      tp *= t;
    }
  }
  return g;
}

Mat GraphFunction::hessian(const Vec& xp) const {
  const long m = xp.size();
  if (std::holds_alternative<PlaneGraph>(kind_)) return Mat::Zero(m, m);
  if (const auto* arc = std::get_if<CircleArcGraph>(&kind_)) {
    const Vec t = xp - base_;
    const double rho2 = arc->radius * arc->radius - t.squaredNorm();
    if (rho2 <= 0) fail(ErrorCode::OutsideDomain, "circle arc graph evaluated beyond its extent");
    const double s = std::sqrt(rho2);
    return arc->branch * (Mat::Identity(m, m) / s + t * t.transpose() / (s * s * s));
  }
  const auto& poly = std::get<PolyGraph>(kind_);
  Mat H = Mat::Zero(m, m);
  for (std::size_t j = 0; j < poly.coeffs.size(); ++j) {
    const double t = xp[j] - base_[j];
    double tp = 1.0;
    for (std::size_t p = 1; p < poly.coeffs[j].size(); ++p) {
      H(j, j) += static_cast<double>((p + 1) * p) * poly.coeffs[j][p] * tp;
      tp *= t;
    }
  }
  return H;
}

// --- charts ----------------------------------------------------------------------------------

CornerChart make_chart(int dim, const Vec& x0, std::vector<GraphFunction> graphs, double M, double R,
                       const std::set<SignMask>& components, double theta0) {
  if (x0.size() != dim) fail(ErrorCode::InvalidArgument, "corner dimension mismatch");
  if (graphs.empty()) fail(ErrorCode::InvalidArgument, "chart needs at least one graph");
  if (M < 0 || R <= 0) fail(ErrorCode::InvalidArgument, "chart needs M >= 0 and R > 0");
  CornerChart chart;
  chart.dim = dim;
  chart.x0 = x0;
  chart.M = M;
  chart.R = R;
  chart.components = components;
  chart.theta0 = theta0;
  chart.normals.resize(dim, static_cast<long>(graphs.size()));
  const Vec xp = head(x0);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (std::abs(graphs[i].value(xp) - x0[dim - 1]) > 1e-10) {
      fail(ErrorCode::InvalidArgument, "graph does not pass through the corner");
    }
    Vec nu(dim);
    nu.head(dim - 1) = -graphs[i].gradient(xp);
    nu[dim - 1] = 1.0;
    chart.normals.col(static_cast<long>(i)) = nu.normalized();
  }
  chart.graphs = std::move(graphs);
  make_cone(chart.normals, components, dim, x0);  // validates L and independence
  return chart;
}

namespace {

double foot_sign(const Vec& x, const Vec& foot_xp, const GraphFunction& f) {
  const long n = x.size();
  Vec p(n);
  p.head(n - 1) = foot_xp;
  p[n - 1] = f.value(foot_xp);
  Vec nu(n);
  nu.head(n - 1) = -f.gradient(foot_xp);
  nu[n - 1] = 1.0;
  const Vec diff = x - p;
  const double dist = diff.norm();
  return diff.dot(nu) >= 0 ? dist : -dist;
}

void check_window(const CornerChart& chart, const Vec& foot_xp) {
  if ((foot_xp - head(chart.x0)).norm() > chart.R) {
    fail(ErrorCode::NoProjection, "nearest point leaves the chart window");
  }
}

}  // namespace

double signed_distance_graph_search(const Vec& x, const CornerChart& chart, int i) {
  const GraphFunction& f = chart.graphs.at(static_cast<std::size_t>(i));
  const long m = x.size() - 1;
  const Vec xp = head(x);
  const double xn = x[m];
  if (!f.defined_at(xp)) fail(ErrorCode::NoProjection, "query lies beyond the graph extent");
  const double vertical = std::abs(xn - f.value(xp));
  if (vertical == 0.0) return 0.0;

  auto objective = [&](const Vec& y) {
    const double r = f.value(y) - xn;
    return (y - xp).squaredNorm() + r * r;
  };

  // Coarse scan of the cube of half-width `vertical` around x' (the foot is no farther than the
  // vertical projection).
  const int per_dim = m == 1 ? 65 : (m == 2 ? 17 : 7);
  Vec best = xp;
  double best_val = vertical * vertical;
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  long total = 1;
  for (long d = 0; d < m; ++d) total *= per_dim;
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    Vec y(m);
    for (long d = 0; d < m; ++d) {
      const int id = static_cast<int>(rem % per_dim);
      rem /= per_dim;
      y[d] = xp[d] + vertical * (2.0 * id / (per_dim - 1) - 1.0);
    }
    if (!f.defined_at(y)) continue;
    const double v = objective(y);
    if (v < best_val) {
      best_val = v;
      best = y;
    }
  }

  Vec y = best;
  for (int it = 0; it < 100; ++it) {
    const double r = f.value(y) - xn;
    const Vec gf = f.gradient(y);
    const Vec grad = 2.0 * (y - xp) + 2.0 * r * gf;
    Mat H = 2.0 * Mat::Identity(m, m) + 2.0 * gf * gf.transpose() + 2.0 * r * f.hessian(y);
    Eigen::LDLT<Mat> ldlt(H);
    Vec step;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0).all()) {
      step = -ldlt.solve(grad);
    } else {
      step = -0.5 * grad;
    }
    double t = 1.0;
    const double f0 = objective(y);
    while (t > 1e-12) {
      const Vec trial = y + t * step;
      if (f.defined_at(trial) && objective(trial) <= f0) break;
      t *= 0.5;
    }
    y += t * step;
    if ((t * step).norm() < 1e-12) break;
  }
  check_window(chart, y);
  return foot_sign(x, y, f);
}

double signed_distance_graph(const Vec& x, const CornerChart& chart, int i) {
  const GraphFunction& f = chart.graphs.at(static_cast<std::size_t>(i));
  const long n = x.size();
  if (n != chart.dim) fail(ErrorCode::InvalidArgument, "query dimension mismatch");
  if (const auto* p = std::get_if<PlaneGraph>(&f.kind())) {
    Vec nu(n);
    nu.head(n - 1) = -p->slope;
    nu[n - 1] = 1.0;
    const double scale = nu.norm();
    const double d = (x[n - 1] - f.value(head(x))) / scale;
    const Vec foot = x - d * nu / scale;
    check_window(chart, head(foot));
    return d;
  }
  if (const auto* arc = std::get_if<CircleArcGraph>(&f.kind())) {
    const Vec diff = x - arc->center;
    const double len = diff.norm();
    if (len == 0.0) fail(ErrorCode::NoProjection, "query at the arc center");
    const Vec foot = arc->center + arc->radius * diff / len;
    if (arc->branch * (arc->center[n - 1] - foot[n - 1]) < 0) {
      fail(ErrorCode::NoProjection, "nearest point lies on the other branch of the arc");
    }
    check_window(chart, head(foot));
    return arc->branch * (arc->radius - len);
  }
  return signed_distance_graph_search(x, chart, i);
}

bool chart_contains(const CornerChart& chart, const Vec& x) {
  const Vec xp = head(x);
  SignMask mask = 0;
  for (int i = 0; i < chart.k(); ++i) {
    const GraphFunction& f = chart.graphs[static_cast<std::size_t>(i)];
    if (!f.defined_at(xp)) fail(ErrorCode::OutsideDomain, "point outside the chart's graph extent");
    const double s = x[chart.dim - 1] - f.value(xp);
    if (s == 0.0) return false;
    if (s > 0) mask |= SignMask{1} << i;
  }
  return chart.components.count(mask) > 0;
}

ConeSpec tangent_cone(const CornerChart& chart) {
  return make_cone(chart.normals, chart.components, chart.dim, chart.x0);
}

Mat full_normal_matrix(const CornerChart& chart) {
  const int n = chart.dim;
  const int k = chart.k();
  Mat full(n, n);
  full.leftCols(k) = chart.normals;
  if (k < n) full.rightCols(n - k) = complement_normals(chart.normals);
  return full;
}

Vec corner_map_T(const CornerChart& chart, const Vec& x) {
  const Mat full = full_normal_matrix(chart);
  const int k = chart.k();
  Vec s(chart.dim);
  for (int i = 0; i < k; ++i) s[i] = signed_distance_graph(x, chart, i);
  for (int j = k; j < chart.dim; ++j) s[j] = full.col(j).dot(x - chart.x0);
  return chart.x0 + full.transpose().partialPivLu().solve(s);
}

Vec corner_map_inverse(const CornerChart& chart, const Vec& y, double tol) {
  Vec x = y;
  auto T = [&](const Vec& z) { return corner_map_T(chart, z); };
  for (int it = 0; it < 60; ++it) {
    const Vec r = T(x) - y;
    if (r.norm() < tol) return x;
    const Mat J = numeric_jacobian(T, x, 1e-6);
    x -= J.partialPivLu().solve(r);
  }
  if ((T(x) - y).norm() < 100 * tol) return x;
  fail(ErrorCode::NoConvergence, "corner map inversion did not converge");
}

SandwichReport cone_sandwich_report(const CornerChart& chart, double r, std::size_t samples,
                                    std::uint64_t seed, double shift_scale) {
  if (r <= 0 || r >= chart.R) fail(ErrorCode::InvalidArgument, "sandwich radius must lie in (0, R)");
  if (chart.theta0 <= 0 || chart.theta0 > M_PI / 2) {
    fail(ErrorCode::InvalidArgument, "chart needs an interior-cone aperture in (0, pi/2]");
  }
  const ConeSpec cone = tangent_cone(chart);
  const int n = chart.dim;
  SandwichReport rep;
  rep.samples = samples;
  rep.shift = shift_scale * chart.M * r * r / std::sin(chart.theta0);
  Vec en = Vec::Zero(n);
  en[n - 1] = rep.shift;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t s = 0; s < samples; ++s) {
    Vec dir(n);
    for (int d = 0; d < n; ++d) dir[d] = normal(rng);
    const double rad = r * std::pow(unit(rng), 1.0 / n);
    const Vec z = chart.x0 + rad * dir.normalized();
    try {
      if (membership(cone, z - en)) {
        ++rep.upper_tested;
        if (!chart_contains(chart, z)) ++rep.upper_violations;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OnBoundary) throw;
    }
    if (chart_contains(chart, z)) {
      ++rep.lower_tested;
      try {
        if (!membership(cone, z + en)) ++rep.lower_violations;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::OnBoundary) throw;
      }
    }
  }
  rep.passed = rep.upper_violations == 0 && rep.lower_violations == 0;
  return rep;
}

bool cone_sandwich_check(const CornerChart& chart, double r) {
  return cone_sandwich_report(chart, r).passed;
}

// --- spheres and conformal maps --------------------------------------------------------------

double circle_chord(double R1, double R2, double alpha) {
  if (!(R1 > 0) || !(R2 > 0)) fail(ErrorCode::InvalidArgument, "radii must be positive");
  if (!(alpha > 0) || !(alpha < M_PI)) fail(ErrorCode::BadAngle, "angle must lie in (0, pi)");
  const double den = std::sqrt(R1 * R1 + R2 * R2 - 2.0 * R1 * R2 * std::cos(alpha));
  return 2.0 * R1 * R2 * std::sin(alpha) / den;
}

SphereIntersection spheres_second_intersection(const Vec& p, const Mat& normals, double r) {
  if (normals.rows() != p.size()) fail(ErrorCode::InvalidArgument, "normal dimension mismatch");
  if (!(r > 0)) fail(ErrorCode::InvalidArgument, "radius must be positive");
  for (int i = 0; i < normals.cols(); ++i) require_unit(normals.col(i), "sphere normal");
  require_independent(normals);
  // Points p + N c on all spheres satisfy G c = t 1, so c is a multiple of G^{-1} 1.
  const Mat gram = normals.transpose() * normals;
  const Vec w = gram.ldlt().solve(Vec::Ones(normals.cols()));
  const double s = w.sum();
  SphereIntersection out;
  out.q = p + normals * (2.0 * r / s * w);
  out.chord = 2.0 * r / std::sqrt(s);
  return out;
}

double sphere_chord_bound(const Mat& normals, double r) {
  const double det = (normals.transpose() * normals).determinant();
  return r * std::sqrt(det) / std::pow(2.0, static_cast<double>(normals.cols()) - 2.0);
}

namespace {

double conformal_denominator(double a, const Vec& x) {
  if (!(a > 0)) fail(ErrorCode::InvalidArgument, "conformal parameter must be positive");
  const double den = a * a + 2.0 * a * x[0] + x.squaredNorm();
  if (std::abs(den) < 1e-14 * a * a) fail(ErrorCode::Pole, "point at the pole of the conformal map");
  return den;
}

}  // namespace

Vec conformal_map(double a, const Vec& x) {
  const double den = conformal_denominator(a, x);
  Vec y = (2.0 * a * a / den) * x;
  y[0] = -a * (a * a - x.squaredNorm()) / den;
  return y;
}

double conformal_factor(double a, const Vec& x) {
  return 2.0 * a * a / conformal_denominator(a, x);
}

Mat numeric_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double step) {
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (long j = 0; j < x.size(); ++j) {
    Vec xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * step);
  }
  return J;
}

}  // namespace blowup
