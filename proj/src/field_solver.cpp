#include "blowup/field_solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "blowup/closed_forms.hpp"
#include "blowup/extrapolation.hpp"
#include "tridiag.hpp"

namespace blowup {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Clock = std::chrono::steady_clock;

constexpr int kDirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
// Arms shorter than this fraction of h are lengthened to it; the boundary moves by at most that.
constexpr double kMinArm = 1e-6;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

SpMat assemble_matrix(const std::vector<Stencil5>& st, const std::vector<JacobianRow>& rows, double shift) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(st.size() * 5);
  for (std::size_t i = 0; i < st.size(); ++i) {
    const int r = static_cast<int>(i);
    trip.emplace_back(r, r, rows[i][0] + shift);
    for (int d = 0; d < 4; ++d) {
      if (st[i].nb[d] >= 0) trip.emplace_back(r, st[i].nb[d], rows[i][d + 1]);
    }
  }
  SpMat A(static_cast<long>(st.size()), static_cast<long>(st.size()));
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

// Sparse LU whose symbolic analysis is reused while the pattern is fixed.
class NewtonLinearSolver {
 public:
  bool solve(const SpMat& A, const std::vector<double>& rhs, std::vector<double>& out) {
    if (!analyzed_) {
      lu_.analyzePattern(A);
      analyzed_ = true;
    }
    lu_.factorize(A);
    if (lu_.info() != Eigen::Success) return false;
    const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<long>(rhs.size()));
    const Eigen::VectorXd x = lu_.solve(b);
    if (lu_.info() != Eigen::Success || !x.allFinite()) return false;
    out.assign(x.data(), x.data() + x.size());
    return true;
  }

 private:
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
};

double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double linf(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

std::vector<double> negated(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = -v[i];
  return out;
}

std::array<double, 4> lagrange4(double t) {
  // Nodes at -1, 0, 1, 2.
  return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
          -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

}  // namespace

// --- grids and fields ------------------------------------------------------------------------

GridSpec make_grid(const Domain2D& domain, double h, const Point2& anchor) {
  if (!(h > 0)) fail(ErrorCode::InvalidArgument, "grid step must be positive");
  GridSpec g;
  g.h = h;
  const double kx = std::ceil((anchor.x() - domain.lo.x()) / h) + 1.0;
  const double ky = std::ceil((anchor.y() - domain.lo.y()) / h) + 1.0;
  g.x0 = anchor.x() - kx * h;
  g.y0 = anchor.y() - ky * h;
  g.nx = static_cast<int>(std::floor((domain.hi.x() - g.x0) / h)) + 2;
  g.ny = static_cast<int>(std::floor((domain.hi.y() - g.y0) / h)) + 2;
  return g;
}

bool ScalarField::inside(int i, int j) const {
  if (i < 0 || j < 0 || i >= grid.nx || j >= grid.ny) return false;
  return mask[grid.flat(i, j)] != kOutside;
}

double ScalarField::sample(const Point2& x) const {
  const double fx = (x.x() - grid.x0) / grid.h;
  const double fy = (x.y() - grid.y0) / grid.h;
  struct Axis {
    int first;
    int count;
    std::array<double, 4> wts;
  };
  auto axis = [](double f) {
    const double r = std::round(f);
    if (std::abs(f - r) < 1e-9) return Axis{static_cast<int>(r), 1, {1.0, 0.0, 0.0, 0.0}};
    const double fl = std::floor(f);
    return Axis{static_cast<int>(fl) - 1, 4, lagrange4(f - fl)};
  };
  const Axis ax = axis(fx), ay = axis(fy);
  const bool use_w = !w.empty();
  double acc = 0.0;
  for (int b = 0; b < ay.count; ++b) {
    for (int a = 0; a < ax.count; ++a) {
      const int i = ax.first + a, j = ay.first + b;
      if (!inside(i, j)) fail(ErrorCode::OutsideWindow, "interpolation stencil leaves the domain mask");
      const std::size_t k = grid.flat(i, j);
      acc += ax.wts[a] * ay.wts[b] * (use_w ? w[k] : u[k]);
    }
  }
  if (!use_w) return acc;
  if (!(acc > 0)) fail(ErrorCode::OutsideWindow, "interpolated substitution value not positive");
  return std::pow(acc, -blowup_exponent(n));
}

// --- stencils --------------------------------------------------------------------------------

StencilSet build_stencils(const Domain2D& domain, double h, const Point2& anchor) {
  StencilSet S;
  S.grid = make_grid(domain, h, anchor);
  const GridSpec& g = S.grid;
  const std::size_t total = static_cast<std::size_t>(g.nx) * g.ny;
  S.mask.assign(total, kOutside);
  S.index.assign(total, -1);
  double deepest = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const Point2 p = g.node(i, j);
      if (!domain.contains(p)) continue;
      S.index[g.flat(i, j)] = static_cast<int>(S.nodes.size());
      S.nodes.emplace_back(i, j);
      S.mask[g.flat(i, j)] = kInterior;
      deepest = std::max(deepest, domain.distance(p));
    }
  }
  if (S.nodes.size() < 16 || deepest < 4.0 * h) {
    fail(ErrorCode::MaskTooCoarse, "grid step does not resolve the domain with eight cells across");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  S.stencils.resize(S.nodes.size());
  S.crossings.assign(S.nodes.size() * 4, Point2(nan, nan));
  for (std::size_t k = 0; k < S.nodes.size(); ++k) {
    const auto [i, j] = S.nodes[k];
    const Point2 p = g.node(i, j);
    Stencil5& st = S.stencils[k];
    for (int d = 0; d < 4; ++d) {
      const int ii = i + kDirs[d][0], jj = j + kDirs[d][1];
      const bool in_grid = ii >= 0 && jj >= 0 && ii < g.nx && jj < g.ny;
      if (in_grid && S.index[g.flat(ii, jj)] >= 0) {
        st.nb[d] = S.index[g.flat(ii, jj)];
        st.arm[d] = h;
        continue;
      }
      const Point2 q = g.node(ii, jj);
      const double t = std::max(domain.crossing(p, q), kMinArm);
      st.nb[d] = -1;
      st.arm[d] = t * h;
      S.crossings[k * 4 + d] = p + t * (q - p);
      S.mask[g.flat(i, j)] = kNearBoundary;
    }
  }
  return S;
}

// --- truncation levels -----------------------------------------------------------------------

namespace {

void set_boundary_values(StencilSet& S, double value) {
  for (Stencil5& st : S.stencils) {
    for (int d = 0; d < 4; ++d) {
      if (st.nb[d] < 0) st.bval[d] = value;
    }
  }
}

ScalarField make_field(const StencilSet& S, int n) {
  ScalarField f;
  f.n = n;
  f.grid = S.grid;
  f.mask = S.mask;
  f.u.assign(S.mask.size(), 0.0);
  return f;
}

int newton_level(StencilSet& S, int n, std::vector<double>& u, const CrossSectionOptions& opt,
                 NewtonLinearSolver& lin, int& picard, double& residual) {
  const std::size_t m = u.size();
  std::vector<double> F, Ft, step, trial(m);
  std::vector<JacobianRow> rows, scratch;
  auto assemble = [&](const std::vector<double>& v, std::vector<double>& out, std::vector<JacobianRow>& r) {
    if (opt.parallel) assemble_u_parallel(S.stencils, n, v, out, r);
    else assemble_u_serial(S.stencils, n, v, out, r);
  };
  for (int it = 0; it < opt.max_newton; ++it) {
    assemble(u, F, rows);
    residual = linf(F);
    if (!lin.solve(assemble_matrix(S.stencils, rows, 0.0), negated(F), step)) {
      fail(ErrorCode::NoConvergence, "sparse factorization failed in the level solve");
    }
    double size = 0.0;
    for (std::size_t i = 0; i < m; ++i) size = std::max(size, std::abs(step[i]) / u[i]);
    if (size < opt.update_tol) {
      for (std::size_t i = 0; i < m; ++i) u[i] += step[i];
      assemble(u, F, rows);
      residual = linf(F);
      return it + 1;
    }
    const double umin = *std::min_element(u.begin(), u.end());
    const double f0 = l2(F);
    double t = 1.0;
    bool accepted = false;
    for (; t > 1e-8; t *= 0.5) {
      bool keep = true;
      for (std::size_t i = 0; i < m; ++i) {
        trial[i] = u[i] + t * step[i];
        if (trial[i] < 0.1 * umin) keep = false;
      }
      if (!keep) continue;
      assemble(trial, Ft, scratch);
      if (l2(Ft) <= (1.0 - 1e-4 * t) * f0) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      ++picard;
      assemble_u_picard(S.stencils, n, u, F, rows);
      if (!lin.solve(assemble_matrix(S.stencils, rows, 0.0), negated(F), step)) {
        fail(ErrorCode::NoConvergence, "sparse factorization failed in the Picard step");
      }
      for (std::size_t i = 0; i < m; ++i) {
        trial[i] = u[i] + step[i];
        if (!(trial[i] > 0)) fail(ErrorCode::NoConvergence, "Picard step lost positivity");
      }
    }
    u.swap(trial);
  }
  fail(ErrorCode::NoConvergence, "Newton iteration did not settle on a truncation level");
}

}  // namespace

CrossSectionResult solve_cross_section(int n, const Domain2D& domain, double h, const CrossSectionOptions& options) {
  if (n < 3) fail(ErrorCode::InvalidArgument, "dimension must be at least 3");
  const auto t0 = Clock::now();
  StencilSet S = build_stencils(domain, h);
  const std::vector<double> levels = options.schedule.levels();
  const double beta = blowup_exponent(n);
  std::vector<double> u(S.nodes.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double d = domain.distance(S.grid.node(S.nodes[k].first, S.nodes[k].second));
    u[k] = d > 0 ? std::min(levels.front(), std::pow(d, -beta)) : levels.front();
  }
  CrossSectionResult res;
  res.report.unknowns = u.size();
  NewtonLinearSolver lin;
  for (double m : levels) {
    set_boundary_values(S, m);
    double residual = 0.0;
    const int its = newton_level(S, n, u, options, lin, res.report.picard_steps, residual);
    res.report.levels.push_back(m);
    res.report.newton_iterations.push_back(its);
    res.report.final_residuals.push_back(residual);
    ScalarField f = make_field(S, n);
    f.level = m;
    for (std::size_t k = 0; k < u.size(); ++k) f.u[S.grid.flat(S.nodes[k].first, S.nodes[k].second)] = u[k];
    res.fields.push_back(std::move(f));
  }
  if (!options.probes.empty() && res.fields.size() >= 3) {
    res.report.probes = extrapolate_truncation(res.fields, options.probes, options.probe_tol);
  }
  res.report.seconds = seconds_since(t0);
  return res;
}

std::vector<ProbeEstimate> extrapolate_truncation(const std::vector<ScalarField>& fields,
                                                  const std::vector<Point2>& probes, double tol) {
  if (fields.size() < 3) fail(ErrorCode::InsufficientSamples, "extrapolation needs at least three levels");
  const std::size_t L = fields.size();
  std::vector<ProbeEstimate> out;
  for (const Point2& x : probes) {
    ProbeEstimate p;
    p.x = x;
    const double v0 = fields[L - 3].sample(x), v1 = fields[L - 2].sample(x), v2 = fields[L - 1].sample(x);
    const TailEstimate est = geometric_tail(v0, v1, v2, 1e-9 * std::max(1.0, v2));
    p.value = est.value;
    p.error = est.error;
    p.reliable = est.contracting && est.error <= tol * std::abs(est.value);
    out.push_back(p);
  }
  return out;
}

// --- substitution form -----------------------------------------------------------------------

CutoffJet smooth_cutoff(double r, double r1, double r2) {
  if (r <= r1) return {1.0, 0.0, 0.0};
  if (r >= r2) return {0.0, 0.0, 0.0};
  const double L = r2 - r1;
  const double t = (r - r1) / L;
  // s(t) = 1 / (1 + e^phi) rises from 0 to 1; the cutoff is 1 - s.
  const double phi = 1.0 / t - 1.0 / (1.0 - t);
  if (std::abs(phi) > 700.0) return {phi > 0 ? 1.0 : 0.0, 0.0, 0.0};
  const double dphi = -1.0 / (t * t) - 1.0 / ((1.0 - t) * (1.0 - t));
  const double d2phi = 2.0 / (t * t * t) - 2.0 / ((1.0 - t) * (1.0 - t) * (1.0 - t));
  const double e = std::exp(phi);
  const double s = 1.0 / (1.0 + e);
  const double sig = e / ((1.0 + e) * (1.0 + e));
  const double s1 = -sig * dphi;
  const double s2 = -(s1 * (1.0 - 2.0 * s) * dphi + sig * d2phi);
  return {1.0 - s, -s1 / L, -s2 / (L * L)};
}

namespace {

struct ReferenceValue {
  double W = 0.0, lap = 0.0, gx = 0.0, gy = 0.0;
};

ReferenceValue corner_reference(const CornerReference& ref, const Point2& x) {
  ReferenceValue out;
  const Point2 rel = x - ref.vertex;
  const double r = rel.norm();
  const CutoffJet chi = smooth_cutoff(r, ref.r_inner, ref.r_outer);
  if (chi.value == 0.0 && chi.d1 == 0.0) return out;
  if (r == 0.0) return out;
  Vec v(2);
  v << rel.x(), rel.y();
  double rr = 0.0, theta = 0.0;
  ref.profile.polar(v, rr, theta);
  const ConeSolution::Jet q = ref.profile.jet(theta);
  const Point2 er = rel / r;
  const Point2 et(-er.y(), er.x());
  const double V = r * q.q;
  const Point2 gradV = q.q * er + q.dq * et;
  const double lapV = (q.q + q.d2q) / r;
  out.W = chi.value * V;
  const Point2 grad = chi.d1 * V * er + chi.value * gradV;
  out.gx = grad.x();
  out.gy = grad.y();
  out.lap = (chi.d2 + chi.d1 / r) * V + 2.0 * chi.d1 * q.q + chi.value * lapV;
  return out;
}

}  // namespace

SubstitutionResult solve_cross_section_substitution(int n, const Domain2D& domain, double h,
                                                    const SubstitutionOptions& options) {
  if (n < 3) fail(ErrorCode::InvalidArgument, "dimension must be at least 3");
  const auto t0 = Clock::now();
  const Point2 anchor = options.corner ? options.corner->vertex : Point2::Zero();
  StencilSet S = build_stencils(domain, h, anchor);
  const std::size_t M = S.nodes.size();
  ReferenceData ref;
  std::vector<double> psi(M);
  if (options.corner) {
    const CornerReference& cr = *options.corner;
    if (cr.profile.geometry != ConeGeometry::Wedge || cr.profile.method != ProfileMethod::Substitution) {
      fail(ErrorCode::InvalidArgument, "corner reference needs a substitution wedge profile");
    }
    ref.W.resize(M);
    ref.lap.resize(M);
    ref.gx.resize(M);
    ref.gy.resize(M);
    for (std::size_t k = 0; k < M; ++k) {
      const ReferenceValue v = corner_reference(cr, S.grid.node(S.nodes[k].first, S.nodes[k].second));
      ref.W[k] = v.W;
      ref.lap[k] = v.lap;
      ref.gx[k] = v.gx;
      ref.gy[k] = v.gy;
    }
    for (std::size_t k = 0; k < M; ++k) {
      for (int d = 0; d < 4; ++d) {
        if (S.stencils[k].nb[d] < 0) S.stencils[k].bval[d] = -corner_reference(cr, S.crossings[k * 4 + d]).W;
      }
    }
  }
  for (std::size_t k = 0; k < M; ++k) {
    const Point2 p = S.grid.node(S.nodes[k].first, S.nodes[k].second);
    const double chi =
        options.corner ? smooth_cutoff((p - anchor).norm(), options.corner->r_inner, options.corner->r_outer).value : 0.0;
    psi[k] = (1.0 - chi) * std::max(domain.distance(p), 1e-3 * h);
  }
  auto w_at = [&](std::size_t k, const std::vector<double>& ps) { return ps[k] + (ref.W.empty() ? 0.0 : ref.W[k]); };

  SubstitutionResult res;
  res.report.unknowns = M;
  NewtonLinearSolver lin;
  std::vector<double> F, step, trial(M);
  std::vector<JacobianRow> rows;
  double dt = options.dt0;
  double fprev = 0.0;
  bool converged = false;
  int it = 0;
  double residual = 0.0;
  for (; it < options.max_iter; ++it) {
    if (options.parallel) assemble_w_parallel(S.stencils, n, ref, psi, F, rows);
    else assemble_w_serial(S.stencils, n, ref, psi, F, rows);
    residual = linf(F);
    if (residual <= options.tol) {
      converged = true;
      break;
    }
    const double fnorm = l2(F) / std::sqrt(static_cast<double>(M));
    if (it > 0) dt = std::min(dt * fprev / fnorm, 1e14);
    fprev = fnorm;
    if (!lin.solve(assemble_matrix(S.stencils, rows, -1.0 / dt), negated(F), step)) {
      fail(ErrorCode::NoConvergence, "sparse factorization failed in the substitution solve");
    }
    double t = 1.0;
    for (;; t *= 0.5) {
      if (t < 1e-12) fail(ErrorCode::NoConvergence, "positivity damping stalled in the substitution solve");
      bool positive = true;
      for (std::size_t k = 0; k < M && positive; ++k) {
        trial[k] = psi[k] + t * step[k];
        positive = w_at(k, trial) > 0;
      }
      if (positive) break;
    }
    double change = 0.0, wmax = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
      change = std::max(change, std::abs(trial[k] - psi[k]));
      wmax = std::max(wmax, w_at(k, trial));
    }
    psi.swap(trial);
    if (dt >= 1e10 && t == 1.0 && change <= 1e-14 * wmax) {
      if (options.parallel) assemble_w_parallel(S.stencils, n, ref, psi, F, rows);
      else assemble_w_serial(S.stencils, n, ref, psi, F, rows);
      residual = linf(F);
      converged = true;
      ++it;
      break;
    }
  }
  if (!converged) fail(ErrorCode::NoConvergence, "pseudo-transient iteration did not converge");

  ScalarField f = make_field(S, n);
  f.w.assign(S.mask.size(), 0.0);
  const double beta = blowup_exponent(n);
  for (std::size_t k = 0; k < M; ++k) {
    const std::size_t g = S.grid.flat(S.nodes[k].first, S.nodes[k].second);
    f.w[g] = w_at(k, psi);
    f.u[g] = std::pow(f.w[g], -beta);
  }
  res.field = std::move(f);
  res.report.newton_iterations.push_back(it);
  res.report.final_residuals.push_back(residual);
  res.report.seconds = seconds_since(t0);
  return res;
}

// --- radial profiles -------------------------------------------------------------------------

double RadialProfile::eval(double radius) const {
  if (radius < r.front() - 1e-14 || radius > r.back() + 1e-14) fail(ErrorCode::OutsideDomain, "radius outside the profile");
  const double f = (radius - r.front()) / h;
  const std::size_t j = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(f))), r.size() - 2);
  const double t = f - static_cast<double>(j);
  if (!std::isfinite(error[j]) || !std::isfinite(error[j + 1])) {
    fail(ErrorCode::OutsideDomain, "radius inside the unresolved blow-up layer");
  }
  return (1.0 - t) * u[j] + t * u[j + 1];
}

RadialProfile solve_radial(int n, double r_in, double r_out, int J, const RadialOptions& options) {
  if (n < 3) fail(ErrorCode::InvalidArgument, "dimension must be at least 3");
  if (!(r_in >= 0) || !(r_out > r_in)) fail(ErrorCode::InvalidArgument, "need 0 <= r_in < r_out");
  if (J < 16) fail(ErrorCode::InvalidArgument, "radial grid needs J >= 16");
  const bool ball = r_in == 0.0;
  if (!ball && !(options.outer_value > 0)) fail(ErrorCode::InvalidArgument, "shell needs a positive outer value");
  const double c = nonlinear_coefficient(n), p = nonlinear_power(n), beta = blowup_exponent(n);
  const int lap_dim = options.laplacian_dim > 0 ? options.laplacian_dim : n;
  RadialProfile prof;
  prof.n = n;
  prof.r_in = r_in;
  prof.r_out = r_out;
  prof.h = (r_out - r_in) / J;
  const double h = prof.h, h2 = h * h;
  for (int j = 0; j <= J; ++j) prof.r.push_back(r_in + j * h);
  // Unknowns: ball j = 0..J-1 (u_J = m); shell j = 1..J-1 (u_0 = m, u_J fixed).
  const int first = ball ? 0 : 1;
  const int count = J - first;
  std::vector<double> u(static_cast<std::size_t>(J + 1));
  const std::vector<double> levels = options.schedule.levels();
  for (int j = 0; j <= J; ++j) {
    const double d = ball ? r_out - prof.r[j] : prof.r[j] - r_in;
    u[j] = d > 0 ? std::min(levels.front(), std::pow(d, -beta)) : levels.front();
  }
  if (!ball) u[J] = options.outer_value;

  auto residual = [&](const std::vector<double>& v, std::vector<double>& F, std::vector<double>* lo,
                      std::vector<double>* dg, std::vector<double>* up, bool frozen) {
    for (int j = first; j < J; ++j) {
      const int row = j - first;
      const double vp1 = std::pow(v[j], p - 1.0);
      const double dn = frozen ? c * vp1 : c * p * vp1;
      double f, a = 0.0, b, e;
      if (j == 0) {
        const double k = 2.0 * lap_dim / h2;
        f = k * (v[1] - v[0]) - c * vp1 * v[0];
        b = -k - dn;
        e = k;
      } else {
        const double drift = (lap_dim - 1) / prof.r[j] / (2.0 * h);
        f = (v[j + 1] - 2.0 * v[j] + v[j - 1]) / h2 + drift * (v[j + 1] - v[j - 1]) - c * vp1 * v[j];
        a = 1.0 / h2 - drift;
        b = -2.0 / h2 - dn;
        e = 1.0 / h2 + drift;
      }
      F[row] = f;
      if (lo) {
        (*lo)[row] = a;
        (*dg)[row] = b;
        (*up)[row] = e;
      }
    }
  };

  std::vector<double> F(count), Ft(count), lo(count), dg(count), up(count), trial;
  for (double m : levels) {
    if (ball) u[J] = m;
    else u[0] = m;
    int its = 0;
    bool done = false;
    double prev_size = std::numeric_limits<double>::infinity();
    for (; its < options.max_newton && !done; ++its) {
      residual(u, F, &lo, &dg, &up, false);
      std::vector<double> step = negated(F);
      if (!detail::solve_tridiagonal(lo, dg, up, step)) fail(ErrorCode::NoConvergence, "singular radial Jacobian");
      double size = 0.0;
      for (int r = 0; r < count; ++r) size = std::max(size, std::abs(step[r]) / u[first + r]);
      // Below 1e-9 a step that no longer halves sits at the roundoff floor of the fine grid.
      const bool stalled = size < 1e-9 && size > 0.5 * prev_size;
      prev_size = size;
      if (size < 1e-13 || stalled) {
        for (int r = 0; r < count; ++r) u[first + r] += step[r];
        done = true;
        continue;
      }
      const double f0 = l2(F);
      double t = 1.0;
      bool accepted = false;
      for (; t > 1e-10; t *= 0.5) {
        trial = u;
        bool positive = true;
        for (int r = 0; r < count; ++r) {
          trial[first + r] += t * step[r];
          if (!(trial[first + r] > 0)) positive = false;
        }
        if (!positive) continue;
        residual(trial, Ft, nullptr, nullptr, nullptr, false);
        if (l2(Ft) <= (1.0 - 1e-4 * t) * f0) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        residual(u, F, &lo, &dg, &up, true);
        step = negated(F);
        if (!detail::solve_tridiagonal(lo, dg, up, step)) fail(ErrorCode::NoConvergence, "singular Picard system");
        trial = u;
        for (int r = 0; r < count; ++r) trial[first + r] += step[r];
      }
      u.swap(trial);
    }
    if (!done) fail(ErrorCode::NoConvergence, "radial Newton iteration did not settle");
    prof.levels.push_back(m);
    prof.newton_iterations.push_back(its);
    prof.level_values.push_back(u);
  }

  const std::size_t L = prof.level_values.size();
  prof.u = u;
  prof.error.assign(u.size(), 0.0);
  if (L >= 3) {
    for (int j = 0; j <= J; ++j) {
      const bool fixed = ball ? j == J : (j == 0 || j == J);
      if (fixed) {
        prof.error[j] = j == J && !ball ? 0.0 : std::numeric_limits<double>::infinity();
        continue;
      }
      const TailEstimate est = geometric_tail(prof.level_values[L - 3][j], prof.level_values[L - 2][j],
                                              prof.level_values[L - 1][j], 1e-9 * std::max(1.0, u[j]));
      prof.u[j] = est.value;
      prof.error[j] = est.contracting ? est.error : std::numeric_limits<double>::infinity();
    }
  }
  return prof;
}

}  // namespace blowup
