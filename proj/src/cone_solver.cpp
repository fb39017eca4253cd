#include "blowup/cone_solver.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "blowup/closed_forms.hpp"
#include "blowup/extrapolation.hpp"
#include "tridiag.hpp"

namespace blowup {

std::vector<double> LevelSchedule::levels() const {
  if (!(base > 0) || !(factor > 1) || count < 1) {
    fail(ErrorCode::InvalidArgument, "level schedule needs base > 0, factor > 1, count >= 1");
  }
  std::vector<double> out;
  double m = base;
  for (int j = 0; j < count; ++j, m *= factor) out.push_back(m);
  return out;
}

const char* to_string(ProfileMethod method) {
  return method == ProfileMethod::TruncationLevels ? "levels" : "substitution";
}

ProfileMethod parse_profile_method(const std::string& text) {
  if (text == "levels") return ProfileMethod::TruncationLevels;
  if (text == "substitution") return ProfileMethod::Substitution;
  fail(ErrorCode::InvalidArgument, "unknown profile method '" + text + "'");
}

TailEstimate geometric_tail(double v0, double v1, double v2, double monotone_tol, double flat_tol) {
  const double d1 = v1 - v0;
  const double d2 = v2 - v1;
  if (d1 < -monotone_tol || d2 < -monotone_tol) {
    fail(ErrorCode::NonMonotoneTail, "sequence decreases between levels");
  }
  TailEstimate est;
  const double scale = std::max({std::abs(v0), std::abs(v1), std::abs(v2), 1e-300});
  if (std::abs(d2) <= flat_tol * scale) {
    est.value = v2;
    est.contracting = true;
    return est;
  }
  if (d1 <= 0.0 || d2 >= d1) {
    est.value = v2;
    est.error = std::numeric_limits<double>::infinity();
    return est;
  }
  const double ratio = d2 / d1;
  const double tail = d2 * ratio / (1.0 - ratio);
  est.value = v2 + tail;
  est.error = std::abs(tail);
  est.contracting = true;
  return est;
}

// --- ConeSolution ----------------------------------------------------------------------------

double ConeSolution::g_node(int j) const {
  const double qj = q.at(static_cast<std::size_t>(j));
  if (!(qj > 0)) fail(ErrorCode::OutsideWindow, "profile is infinite at this node");
  return std::pow(qj, -beta());
}

void ConeSolution::build_interpolant() {
  const int jlo = static_cast<int>(std::llround(theta_lo / h));
  const int jhi = static_cast<int>(std::llround(theta_hi / h));
  // Substitution profiles are known up to the blow-up boundary, where q vanishes linearly.
  int a = jlo, b = jhi;
  double dlo = std::numeric_limits<double>::quiet_NaN();
  double dhi = std::numeric_limits<double>::quiet_NaN();
  if (method == ProfileMethod::Substitution) {
    if (geometry == ConeGeometry::Wedge) {
      a = 0;
      dlo = 1.0;
    } else {
      a = 0;
      dlo = 0.0;
    }
    b = J();
    dhi = -1.0;
  }
  if (b - a < 3) fail(ErrorCode::WindowEmpty, "window holds fewer than four nodes");
  spline_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(
      q.data() + a, static_cast<std::size_t>(b - a + 1), a * h, h, dlo, dhi);
  spline_lo_ = a * h;
  spline_hi_ = b * h;
}

ConeSolution::Jet ConeSolution::jet(double theta) const {
  double sign = 1.0;
  double t = theta;
  if (geometry == ConeGeometry::Wedge && method == ProfileMethod::Substitution) {
    if (t < 0.0) {
      t = -t;
      sign = -1.0;
    } else if (t > opening) {
      t = 2.0 * opening - t;
      sign = -1.0;
    }
  }
  if (t < spline_lo_ - 1e-12 || t > spline_hi_ + 1e-12) {
    fail(ErrorCode::OutsideWindow, "angle outside the profile range");
  }
  t = std::clamp(t, spline_lo_, spline_hi_);
  return {sign * spline_(t), spline_.prime(t), sign * spline_.double_prime(t)};
}

double ConeSolution::g(double theta) const {
  if (theta < theta_lo - 1e-12 || theta > theta_hi + 1e-12) {
    fail(ErrorCode::OutsideWindow, "angle outside the evaluation window");
  }
  const double qv = spline_(std::clamp(theta, spline_lo_, spline_hi_));
  if (!(qv > 0)) fail(ErrorCode::OutsideWindow, "profile not positive at this angle");
  return std::pow(qv, -beta());
}

void ConeSolution::polar(const Vec& x, double& r, double& theta) const {
  if (geometry == ConeGeometry::Wedge) {
    if (x.size() < 2) fail(ErrorCode::InvalidArgument, "wedge evaluation needs two coordinates");
    r = std::hypot(x[0], x[1]);
    theta = std::atan2(x[1], x[0]) - start_angle;
    // Center the branch cut opposite the bisector so both faces are approached continuously.
    const double mid = 0.5 * opening;
    while (theta < mid - M_PI) theta += 2.0 * M_PI;
    while (theta >= mid + M_PI) theta -= 2.0 * M_PI;
  } else {
    if (x.size() != axis.size()) fail(ErrorCode::InvalidArgument, "zonal evaluation dimension mismatch");
    r = x.norm();
    const double along = x.dot(axis);
    theta = std::atan2((x - along * axis).norm(), along);
  }
}

double eval_coneSolution(const ConeSolution& sol, const Vec& x) {
  double r = 0.0, theta = 0.0;
  sol.polar(x, r, theta);
  if (!(r > 0)) fail(ErrorCode::OutsideWindow, "evaluation at the cone vertex");
  return std::pow(r, -sol.beta()) * sol.g(theta);
}

ConeSolution with_start_angle(ConeSolution sol, double start_angle) {
  sol.start_angle = start_angle;
  return sol;
}

// --- one-dimensional solvers -----------------------------------------------------------------

namespace {

struct ProfileProblem {
  bool zonal = false;
  int n = 3;
  double beta = 0.5;
  double c = 0.75;
  double p = 5.0;
  double h = 0.0;
  int J = 0;
  int first() const { return zonal ? 0 : 1; }
  int last() const { return J - 1; }
  int unknowns() const { return last() - first() + 1; }
  double cot(int j) const { return 1.0 / std::tan(j * h); }
};

ProfileProblem make_problem(int n, double span, int J, bool zonal) {
  if (n < 3) fail(ErrorCode::InvalidArgument, "dimension must be at least 3");
  if (J < 64) fail(ErrorCode::InvalidArgument, "profile grid needs J >= 64");
  ProfileProblem P;
  P.zonal = zonal;
  P.n = n;
  P.beta = blowup_exponent(n);
  P.c = nonlinear_coefficient(n);
  P.p = nonlinear_power(n);
  P.h = span / J;
  P.J = J;
  return P;
}

struct Tridiag {
  std::vector<double> lo, diag, up;
  explicit Tridiag(int m) : lo(m, 0.0), diag(m, 0.0), up(m, 0.0) {}
};

// Truncated blow-up problem for g. `frozen` switches to the Picard linearization around `g`.
double g_residual(const ProfileProblem& P, const std::vector<double>& g, std::vector<double>& F,
                  Tridiag* A, bool frozen) {
  const double h2 = P.h * P.h;
  double fmax = 0.0;
  for (int j = P.first(); j <= P.last(); ++j) {
    const int r = j - P.first();
    const double gj = g[j];
    const double gp1 = std::pow(gj, P.p - 1.0);
    const double nl = P.c * gp1 * gj;
    const double dnl = frozen ? P.c * gp1 : P.c * P.p * gp1;
    double f = 0.0;
    double lo = 0.0, dg = 0.0, up = 0.0;
    if (!P.zonal) {
      f = (g[j + 1] - 2.0 * gj + g[j - 1]) / h2 + P.beta * P.beta * gj - nl;
      lo = 1.0 / h2;
      up = 1.0 / h2;
      dg = -2.0 / h2 + P.beta * P.beta - dnl;
    } else if (j == 0) {
      const double k = (P.n - 1) * 2.0 / h2;
      f = k * (g[1] - gj) - P.beta * P.beta * gj - nl;
      up = k;
      dg = -k - P.beta * P.beta - dnl;
    } else {
      const double a = (P.n - 2) * P.cot(j) / (2.0 * P.h);
      f = (g[j + 1] - 2.0 * gj + g[j - 1]) / h2 + a * (g[j + 1] - g[j - 1]) - P.beta * P.beta * gj - nl;
      lo = 1.0 / h2 - a;
      up = 1.0 / h2 + a;
      dg = -2.0 / h2 - P.beta * P.beta - dnl;
    }
    if (frozen) f = f + nl - dnl * gj;  // linear operator with frozen coefficient, applied to g
    F[r] = f;
    fmax = std::max(fmax, std::abs(f));
    if (A) {
      A->lo[r] = lo;
      A->diag[r] = dg;
      A->up[r] = up;
    }
  }
  return fmax;
}

double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Damped Newton for one truncation level; g holds the boundary values on entry.
int solve_level(const ProfileProblem& P, std::vector<double>& g, const ProfileOptions& opt, int& picard,
                double& residual) {
  const int m = P.unknowns();
  std::vector<double> F(m), Ft(m), trial(g.size());
  Tridiag A(m);
  const double scale_op = std::max(1.0, 4.0 / (P.h * P.h));
  for (int it = 0; it < opt.max_newton; ++it) {
    const double fmax = g_residual(P, g, F, &A, false);
    const double gmax = *std::max_element(g.begin(), g.end());
    residual = fmax;
    if (fmax <= opt.newton_tol * (1.0 + gmax) * scale_op) return it;
    std::vector<double> step(F);
    for (double& s : step) s = -s;
    bool ok = detail::solve_tridiagonal(A.lo, A.diag, A.up, step);
    if (ok) {
      double size = 0.0;
      for (int r = 0; r < m; ++r) size = std::max(size, std::abs(step[r]) / g[P.first() + r]);
      if (size < 1e-13) {
        for (int r = 0; r < m; ++r) g[P.first() + r] += step[r];
        residual = g_residual(P, g, F, nullptr, false);
        return it + 1;
      }
    }
    double t = 1.0;
    const double f0 = l2(F);
    bool accepted = false;
    while (ok && t > 1e-10) {
      trial = g;
      bool positive = true;
      for (int r = 0; r < m; ++r) {
        trial[P.first() + r] = g[P.first() + r] + t * step[r];
        if (!(trial[P.first() + r] > 0)) positive = false;
      }
      if (positive) {
        g_residual(P, trial, Ft, nullptr, false);
        if (l2(Ft) <= (1.0 - 1e-4 * t) * f0) {
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      // Picard step: positivity is preserved by the discrete maximum principle.
      ++picard;
      g_residual(P, g, F, &A, true);
      std::vector<double> rhs(F);
      for (double& s : rhs) s = -s;
      if (!detail::solve_tridiagonal(A.lo, A.diag, A.up, rhs)) {
        fail(ErrorCode::NoConvergence, "singular Picard system");
      }
      trial = g;
      for (int r = 0; r < m; ++r) trial[P.first() + r] += rhs[r];
      for (int r = 0; r < m; ++r) {
        if (!(trial[P.first() + r] > 0)) fail(ErrorCode::NoConvergence, "Picard step lost positivity");
      }
    }
    double rel = 0.0;
    for (int r = 0; r < m; ++r) {
      const int j = P.first() + r;
      rel = std::max(rel, std::abs(trial[j] - g[j]) / g[j]);
    }
    g.swap(trial);
    if (accepted && t == 1.0 && rel < 1e-14) {
      residual = g_residual(P, g, F, nullptr, false);
      return it + 1;
    }
  }
  fail(ErrorCode::NoConvergence, "Newton iteration stagnated on a truncation level");
}

ConeSolution finish_levels(const ProfileProblem& P, const std::vector<std::vector<double>>& history,
                           const std::vector<double>& levels, const ProfileOptions& opt) {
  const std::vector<double>& last = history.back();
  const double m_max = levels.back();
  const int J = P.J;
  std::vector<double> limit(last);
  std::vector<char> ok(static_cast<std::size_t>(J + 1), 0);
  const bool use_tail = opt.extrapolate && history.size() >= 3;
  for (int j = P.first(); j <= P.last(); ++j) {
    if (!(last[j] < opt.window_fraction * m_max)) continue;
    if (use_tail) {
      const std::size_t L = history.size();
      const TailEstimate est = geometric_tail(history[L - 3][j], history[L - 2][j], history[L - 1][j],
                                              1e-9 * std::max(1.0, last[j]));
      if (!est.contracting) continue;
      limit[j] = est.value;
    }
    ok[j] = 1;
  }
  // Largest contiguous run of valid nodes around the symmetry point.
  int seed = P.zonal ? 0 : J / 2;
  if (!ok[seed]) {
    for (int j = P.first(); j <= P.last(); ++j) {
      if (ok[j] && (!ok[seed] || limit[j] < limit[seed])) seed = j;
    }
  }
  if (!ok[seed]) fail(ErrorCode::WindowEmpty, "no grid node lies below the window threshold");
  int lo = seed, hi = seed;
  while (lo - 1 >= P.first() && ok[lo - 1]) --lo;
  while (hi + 1 <= P.last() && ok[hi + 1]) ++hi;
  if (hi - lo < 3) fail(ErrorCode::WindowEmpty, "window holds fewer than four nodes");

  ConeSolution sol;
  sol.dim = P.n;
  sol.h = P.h;
  sol.q.assign(static_cast<std::size_t>(J + 1), 0.0);
  for (int j = 0; j <= J; ++j) sol.q[j] = std::pow(limit[j], -1.0 / P.beta);
  sol.m_max = m_max;
  sol.theta_lo = lo * P.h;
  sol.theta_hi = hi * P.h;
  sol.method = ProfileMethod::TruncationLevels;
  return sol;
}

ConeSolution solve_levels(const ProfileProblem& P, const ProfileOptions& opt, ProfileReport* report) {
  const std::vector<double> levels = opt.schedule.levels();
  const int J = P.J;
  std::vector<double> g(static_cast<std::size_t>(J + 1));
  std::vector<std::vector<double>> history;
  ProfileReport local;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const double m = levels[l];
    if (l == 0) {
      for (int j = 0; j <= J; ++j) {
        const double dist = P.zonal ? (J - j) * P.h : std::min(j, J - j) * P.h;
        g[j] = dist > 0 ? std::min(m, std::pow(dist, -P.beta)) : m;
      }
    }
    if (!P.zonal) g[0] = m;
    g[J] = m;
    double residual = 0.0;
    const int its = solve_level(P, g, opt, local.picard_steps, residual);
    local.levels.push_back(m);
    local.newton_iterations.push_back(its);
    local.final_residual = residual;
    if (opt.keep_levels || l + 3 >= levels.size()) history.push_back(g);
  }
  ConeSolution sol = finish_levels(P, history, levels, opt);
  if (report) {
    if (opt.keep_levels) local.level_values = history;
    *report = std::move(local);
  }
  return sol;
}

double q_residual(const ProfileProblem& P, const std::vector<double>& q, std::vector<double>& F, Tridiag* A) {
  const double h = P.h, h2 = h * h, b = P.beta;
  double fmax = 0.0;
  for (int j = P.first(); j <= P.last(); ++j) {
    const int r = j - P.first();
    const double qj = q[j];
    double f, lo = 0.0, dg, up;
    if (P.zonal && j == 0) {
      const double k = (P.n - 1) * 2.0 / h2;
      f = k * qj * (q[1] - qj) + (b + 1.0) + b * qj * qj;
      dg = k * (q[1] - 2.0 * qj) + 2.0 * b * qj;
      up = k * qj;
    } else {
      const double qpp = (q[j + 1] - 2.0 * qj + q[j - 1]) / h2;
      const double qp = (q[j + 1] - q[j - 1]) / (2.0 * h);
      f = qj * qpp - (b + 1.0) * (qp * qp - 1.0);
      dg = qpp - 2.0 * qj / h2;
      up = qj / h2 - (b + 1.0) * qp / h;
      lo = qj / h2 + (b + 1.0) * qp / h;
      if (!P.zonal) {
        f -= b * qj * qj;
        dg -= 2.0 * b * qj;
      } else {
        const double a = (P.n - 2) * P.cot(j);
        f += a * qj * qp + b * qj * qj;
        dg += a * qp + 2.0 * b * qj;
        up += a * qj / (2.0 * h);
        lo -= a * qj / (2.0 * h);
      }
    }
    F[r] = f;
    fmax = std::max(fmax, std::abs(f));
    if (A) {
      A->lo[r] = lo;
      A->diag[r] = dg;
      A->up[r] = up;
    }
  }
  return fmax;
}

ConeSolution solve_substitution(const ProfileProblem& P, double span, const ProfileOptions& opt,
                                ProfileReport* report) {
  const int J = P.J;
  const int m = P.unknowns();
  std::vector<double> q(static_cast<std::size_t>(J + 1), 0.0);
  for (int j = 0; j <= J; ++j) {
    const double t = j * P.h;
    q[j] = P.zonal ? (2.0 * span / M_PI) * std::cos(0.5 * M_PI * t / span) : (span / M_PI) * std::sin(M_PI * t / span);
  }
  q[J] = 0.0;
  if (!P.zonal) q[0] = 0.0;
  std::vector<double> F(m), Ft(m), trial;
  Tridiag A(m);
  int its = 0;
  double residual = 0.0;
  bool converged = false;
  for (; its < opt.max_newton; ++its) {
    residual = q_residual(P, q, F, &A);
    // Second differences carry roundoff of order eps q^2 / h^2, which bounds the attainable residual.
    const double qmax = *std::max_element(q.begin(), q.end());
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * qmax * qmax / (P.h * P.h);
    if (residual <= std::max(opt.newton_tol, floor)) {
      converged = true;
      break;
    }
    std::vector<double> step(F);
    for (double& s : step) s = -s;
    if (!detail::solve_tridiagonal(A.lo, A.diag, A.up, step)) {
      fail(ErrorCode::NoConvergence, "singular Jacobian in the substitution solve");
    }
    const double f0 = l2(F);
    double t = 1.0;
    for (; t > 1e-10; t *= 0.5) {
      trial = q;
      bool positive = true;
      for (int r = 0; r < m; ++r) {
        trial[P.first() + r] += t * step[r];
        if (!(trial[P.first() + r] > 0)) positive = false;
      }
      if (!positive) continue;
      q_residual(P, trial, Ft, nullptr);
      if (l2(Ft) <= (1.0 - 1e-4 * t) * f0) break;
    }
    if (t <= 1e-10) fail(ErrorCode::NoConvergence, "line search failed in the substitution solve");
    q.swap(trial);
  }
  if (!converged) fail(ErrorCode::NoConvergence, "substitution Newton did not converge");
  ConeSolution sol;
  sol.dim = P.n;
  sol.h = P.h;
  sol.q = q;
  sol.m_max = 0.0;
  sol.theta_lo = P.zonal ? 0.0 : P.h;
  sol.theta_hi = (J - 1) * P.h;
  sol.method = ProfileMethod::Substitution;
  if (report) {
    *report = ProfileReport{};
    report->newton_iterations.push_back(its);
    report->final_residual = residual;
  }
  return sol;
}

}  // namespace

ConeSolution solve_wedge_profile(int n, double omega, int J, const ProfileOptions& options,
                                 ProfileReport* report) {
  if (!(omega > 0) || !(omega < 2.0 * M_PI)) fail(ErrorCode::InvalidArgument, "opening must lie in (0, 2 pi)");
  const ProfileProblem P = make_problem(n, omega, J, false);
  ConeSolution sol = options.method == ProfileMethod::TruncationLevels ? solve_levels(P, options, report)
                                                                       : solve_substitution(P, omega, options, report);
  sol.geometry = ConeGeometry::Wedge;
  sol.opening = omega;
  sol.build_interpolant();
  return sol;
}

ConeSolution solve_zonal_profile(int n, double aperture, int J, const ProfileOptions& options,
                                 ProfileReport* report) {
  if (!(aperture > 0) || !(aperture < M_PI)) fail(ErrorCode::InvalidArgument, "aperture must lie in (0, pi)");
  const ProfileProblem P = make_problem(n, aperture, J, true);
  ConeSolution sol = options.method == ProfileMethod::TruncationLevels ? solve_levels(P, options, report)
                                                                       : solve_substitution(P, aperture, options, report);
  sol.geometry = ConeGeometry::Zonal;
  sol.opening = aperture;
  sol.axis = Vec::Zero(n);
  sol.axis[n - 1] = 1.0;
  sol.build_interpolant();
  return sol;
}

// --- cones in distance coordinates -----------------------------------------------------------

ConeSpec wedge_cone(const ConeSolution& sol) {
  if (sol.geometry != ConeGeometry::Wedge) fail(ErrorCode::InvalidArgument, "distance form needs a wedge");
  const double a = sol.start_angle;
  const double b = sol.start_angle + sol.opening;
  Vec n1(2), n2(2);
  n1 << -std::sin(a), std::cos(a);
  n2 << std::sin(b), -std::cos(b);
  if (std::abs(sol.opening - M_PI) < 1e-12) {
    Mat N(2, 1);
    N.col(0) = n1;
    return make_cone(N, std::set<SignMask>{1u}, 2);
  }
  Mat N(2, 2);
  N.col(0) = n1;
  N.col(1) = n2;
  std::set<SignMask> L{3u};
  if (sol.opening > M_PI) L = {1u, 2u, 3u};
  return make_cone(N, L, 2);
}

double eval_fV(const ConeSolution& sol, const Vec& d) {
  const ConeSpec cone = wedge_cone(sol);
  if (d.size() != cone.k()) fail(ErrorCode::InvalidArgument, "distance vector length differs from k");
  const Vec x = cone.normals * cone.gram().ldlt().solve(d);
  try {
    if (!membership(cone, x)) fail(ErrorCode::InconsistentDistances, "recovered point lies outside the cone");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::OnBoundary) fail(ErrorCode::InconsistentDistances, "recovered point on a face");
    throw;
  }
  return eval_coneSolution(sol, x);
}

Mat wedge_map(const ConeSolution& sol1, const ConeSolution& sol2) {
  auto dirs = [](const ConeSolution& s) {
    Mat D(2, 2);
    D << std::cos(s.start_angle), std::cos(s.start_angle + s.opening), std::sin(s.start_angle),
        std::sin(s.start_angle + s.opening);
    return D;
  };
  const Mat D1 = dirs(sol1);
  if (std::abs(D1.determinant()) < 1e-12) fail(ErrorCode::DegenerateNormals, "wedge faces are collinear");
  return dirs(sol2) * D1.inverse();
}

namespace {

double spectral_norm(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

}  // namespace

CompareStats compare_cones(const ConeSolution& sol1, const ConeSolution& sol2, const Mat& A, int samples) {
  if (A.rows() != 2 || A.cols() != 2) fail(ErrorCode::InvalidArgument, "cone map acts on the active plane (2x2)");
  const ConeSpec c1 = wedge_cone(sol1);
  const ConeSpec c2 = wedge_cone(sol2);
  if (c1.k() != c2.k()) fail(ErrorCode::InvalidArgument, "cones have different numbers of faces");
  CompareStats st;
  const Mat Ainv = A.inverse();
  for (int s = 0; s < samples; ++s) {
    const double theta = sol2.theta_lo + (s + 0.5) / samples * (sol2.theta_hi - sol2.theta_lo);
    Vec x(2);
    x << std::cos(sol2.start_angle + theta), std::sin(sol2.start_angle + theta);
    try {
      const double u1 = eval_coneSolution(sol1, Ainv * x);
      const double u2 = eval_coneSolution(sol2, x);
      st.sup_u = std::max(st.sup_u, std::abs(u1 / u2 - 1.0));
      ++st.u_samples;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OutsideWindow) throw;
    }
  }
  const int fcount = c1.k() == 1 ? 1 : samples;
  for (int s = 0; s < fcount; ++s) {
    Vec d(c1.k());
    if (c1.k() == 1) {
      d << 1.0;
    } else {
      const double phi = (s + 0.5) / samples * 0.5 * M_PI;
      d << std::cos(phi), std::sin(phi);
    }
    try {
      const double f1 = eval_fV(sol1, d);
      const double f2 = eval_fV(sol2, d);
      st.sup_f = std::max(st.sup_f, std::abs(f1 / f2 - 1.0));
      ++st.f_samples;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OutsideWindow) throw;
    }
  }
  st.norm_A = spectral_norm(A - Mat::Identity(2, 2));
  st.norm_N = spectral_norm(c1.normals - c2.normals);
  if (st.norm_A > 0) {
    st.u_over_A = st.sup_u / st.norm_A;
    st.f_over_A = st.sup_f / st.norm_A;
  }
  if (st.norm_N > 0) {
    st.u_over_N = st.sup_u / st.norm_N;
    st.f_over_N = st.sup_f / st.norm_N;
  }
  return st;
}

// --- serialization ---------------------------------------------------------------------------

std::string to_json(const ConeSolution& sol) {
  nlohmann::json j;
  j["format"] = "blowup-cone-solution";
  j["version"] = 1;
  j["dim"] = sol.dim;
  j["geometry"] = sol.geometry == ConeGeometry::Wedge ? "wedge" : "zonal";
  j["opening"] = sol.opening;
  j["start_angle"] = sol.start_angle;
  j["axis"] = std::vector<double>(sol.axis.data(), sol.axis.data() + sol.axis.size());
  j["method"] = to_string(sol.method);
  j["h"] = sol.h;
  j["m_max"] = sol.m_max;
  j["theta_lo"] = sol.theta_lo;
  j["theta_hi"] = sol.theta_hi;
  nlohmann::json g = nlohmann::json::array();
  for (double qj : sol.q) {
    if (qj > 0) g.push_back(std::pow(qj, -sol.beta()));
    else g.push_back(nullptr);
  }
  j["g"] = std::move(g);
  return j.dump(1);
}

ConeSolution cone_solution_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("cone solution file: ") + e.what());
  }
  if (j.value("format", "") != "blowup-cone-solution") fail(ErrorCode::ConfigError, "not a cone solution file");
  try {
    ConeSolution sol;
    sol.dim = j.at("dim").get<int>();
    sol.geometry = j.at("geometry").get<std::string>() == "wedge" ? ConeGeometry::Wedge : ConeGeometry::Zonal;
    sol.opening = j.at("opening").get<double>();
    sol.start_angle = j.at("start_angle").get<double>();
    const auto axis = j.at("axis").get<std::vector<double>>();
    sol.axis = Eigen::Map<const Vec>(axis.data(), static_cast<long>(axis.size()));
    sol.method = parse_profile_method(j.at("method").get<std::string>());
    sol.h = j.at("h").get<double>();
    sol.m_max = j.at("m_max").get<double>();
    sol.theta_lo = j.at("theta_lo").get<double>();
    sol.theta_hi = j.at("theta_hi").get<double>();
    for (const auto& v : j.at("g")) {
      sol.q.push_back(v.is_null() ? 0.0 : std::pow(v.get<double>(), -1.0 / sol.beta()));
    }
    sol.build_interpolant();
    return sol;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("cone solution file: ") + e.what());
  }
}

void save_cone_solution(const ConeSolution& sol, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::ConfigError, "cannot write " + path);
  out << to_json(sol) << '\n';
}

ConeSolution load_cone_solution(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return cone_solution_from_json(buf.str());
}

}  // namespace blowup
