#include "blowup/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>

#include "blowup/closed_forms.hpp"
#include "blowup/field_solver.hpp"
#include "blowup/verifier.hpp"

namespace blowup {

namespace fs = std::filesystem;

namespace {

using Window = std::pair<double, double>;

class Reporter {
 public:
  explicit Reporter(const ScenarioConfig& config) : config_(config) {}

  bool enabled(const std::string& check) const { return config_.check(check) != nullptr; }
  Window window(const std::string& check) const {
    const CheckConfig* c = config_.check(check);
    if (!c || !c->window) fail(ErrorCode::ConfigError, config_.source + ": check '" + check + "' needs a window");
    return *c->window;
  }

  void add(const std::string& check, double value, std::optional<double> constant = std::nullopt) {
    const CheckConfig* c = config_.check(check);
    if (!c) return;
    ReportRow row;
    row.scenario = config_.name;
    row.anchor = config_.anchor;
    row.check = check;
    row.value = value;
    row.constant = constant;
    row.window = c->window;
    row.min = c->min;
    row.max = c->max;
    row.passed = c->passes(value);
    rows_.push_back(row);
  }

  std::vector<ReportRow> take() { return std::move(rows_); }

 private:
  const ScenarioConfig& config_;
  std::vector<ReportRow> rows_;
};

struct Context {
  const ScenarioConfig& config;
  Reporter report;
  std::string dir;
  std::vector<std::string> files;

  void save(const std::string& file, const std::string& text) {
    const std::string path = (fs::path(dir) / file).string();
    write_text(path, text);
    files.push_back(path);
  }
};

LevelSchedule schedule_or(const ScenarioConfig& c, const LevelSchedule& fallback) {
  return c.schedule_set ? c.schedule : fallback;
}

double max_rel_error(const std::function<double(double)>& u, const std::function<double(double)>& exact,
                     const std::vector<double>& abscissa, const Window& w) {
  double worst = 0.0;
  std::size_t used = 0;
  for (double s : abscissa) {
    if (s < w.first || s > w.second) continue;
    worst = std::max(worst, std::abs(u(s) / exact(s) - 1.0));
    ++used;
  }
  if (used == 0) fail(ErrorCode::InsufficientSamples, "no nodes inside the error window");
  return worst;
}

void run_radial(Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  const double r_in = c.param("r_in", 0.0);
  const double r_out = c.param("r_out", 1.0);
  RadialOptions opt;
  opt.schedule = schedule_or(c, opt.schedule);
  const int J = c.J > 0 ? c.J : 100000;
  Vec origin = Vec::Zero(c.n);
  std::function<double(double)> exact;
  if (r_in > 0) {
    const SolutionHandle v = ball_exterior(c.n, r_in, origin);
    origin[0] = r_out;
    opt.outer_value = v(origin);
    exact = [v, n = c.n](double r) {
      Vec x = Vec::Zero(n);
      x[0] = r;
      return v(x);
    };
  } else {
    const SolutionHandle u = ball_interior(c.n, r_out, origin);
    exact = [u, n = c.n](double r) {
      Vec x = Vec::Zero(n);
      x[0] = r;
      return u(x);
    };
  }
  const RadialProfile p = solve_radial(c.n, r_in, r_out, J, opt);
  if (ctx.report.enabled("max-rel-error")) {
    std::vector<double> rs;
    for (std::size_t i = 0; i < p.r.size(); ++i) {
      if (std::isfinite(p.error[i])) rs.push_back(p.r[i]);
    }
    const auto value_at = [&](double r) {
      const auto it = std::lower_bound(p.r.begin(), p.r.end(), r);
      return p.u[static_cast<std::size_t>(it - p.r.begin())];
    };
    ctx.report.add("max-rel-error", max_rel_error(value_at, exact, rs, ctx.report.window("max-rel-error")));
  }
  ctx.save("radial.csv", radial_to_csv(p));
}

ProfileOptions profile_options(const ScenarioConfig& c, ProfileMethod fallback) {
  ProfileOptions o;
  o.method = c.method.empty() ? fallback : parse_profile_method(c.method);
  o.schedule = schedule_or(c, o.schedule);
  return o;
}

void profile_checks(Context& ctx, const ConeSolution& sol, const std::function<double(double)>& exact, bool has_oracle) {
  if (ctx.report.enabled("max-rel-error")) {
    if (!has_oracle) fail(ErrorCode::ConfigError, ctx.config.source + ": no closed form for this opening");
    std::vector<double> thetas;
    for (int j = 0; j <= sol.J(); ++j) {
      const double t = j * sol.h;
      if (t >= sol.theta_lo && t <= sol.theta_hi) thetas.push_back(t);
    }
    const Window w = ctx.report.window("max-rel-error");
    if (w.first < sol.theta_lo - 1e-12 || w.second > sol.theta_hi + 1e-12) {
      fail(ErrorCode::OutsideWindow, "error window exceeds the resolved profile window");
    }
    ctx.report.add("max-rel-error", max_rel_error([&](double t) { return sol.g(t); }, exact, thetas, w));
  }
  if (ctx.report.enabled("bound-ratio")) {
    const BoundsReport b = bounds_check(sol, 1e9);
    ctx.report.add("bound-ratio", b.upper / std::pow(2.0, sol.beta()), b.lower);
  }
  ctx.save("profile.json", to_json(sol));
}

void run_wedge_profile(Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  const double omega = c.param("omega", M_PI);
  const ConeSolution sol = solve_wedge_profile(c.n, omega, c.J > 0 ? c.J : 20000, profile_options(c, ProfileMethod::TruncationLevels));
  const double b = blowup_exponent(c.n);
  profile_checks(ctx, sol, [b](double t) { return std::pow(std::sin(t), -b); }, std::abs(omega - M_PI) < 1e-14);
}

void run_zonal_profile(Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  const double aperture = c.param("aperture", 0.5 * M_PI);
  const ConeSolution sol =
      solve_zonal_profile(c.n, aperture, c.J > 0 ? c.J : 20000, profile_options(c, ProfileMethod::TruncationLevels));
  const double b = blowup_exponent(c.n);
  profile_checks(ctx, sol, [b](double t) { return std::pow(std::cos(t), -b); }, std::abs(aperture - 0.5 * M_PI) < 1e-14);
}

// Tangent-cone profile of the scenario corner, rotated so that the bisector points along `bisector`.
ConeSolution corner_profile(const ScenarioConfig& c) {
  const double omega = c.param("omega", 2.0 * M_PI / 3.0);
  ProfileOptions o;
  o.method = ProfileMethod::Substitution;
  const ConeSolution sol = solve_wedge_profile(c.n, omega, static_cast<int>(c.param("profile_J", 4000)), o);
  return with_start_angle(sol, c.param("bisector", 0.5 * M_PI) - 0.5 * omega);
}

ScalarField solve_field(Context& ctx, const Domain2D& dom, const std::optional<ConeSolution>& corner) {
  const ScenarioConfig& c = ctx.config;
  ScalarField field;
  if (c.method.empty() || c.method == "substitution") {
    SubstitutionOptions o;
    if (corner) o.corner = CornerReference{Point2(c.param("vertex_x", 0.0), c.param("vertex_y", 0.0)), *corner};
    field = solve_cross_section_substitution(c.n, dom, c.h, o).field;
  } else if (c.method == "levels") {
    CrossSectionOptions o;
    o.schedule = schedule_or(c, o.schedule);
    field = solve_cross_section(c.n, dom, c.h, o).fields.back();
  } else {
    fail(ErrorCode::ConfigError, c.source + ": unknown field method '" + c.method + "'");
  }
  ctx.save("field.csv", field_to_csv(field));
  return field;
}

void run_boundary_rate(Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  const Domain2D dom = scenario_domain(c);
  const ScalarField field = solve_field(ctx, dom, std::nullopt);
  const Ray ray{Point2(c.param("ray_x", 0.0), c.param("ray_y", 0.0)), Point2(c.param("ray_dx", 0.0), c.param("ray_dy", 1.0))};
  for (const char* check : {"slope", "r2"}) {
    if (!ctx.report.enabled(check)) continue;
    const Window w = ctx.report.window(check);
    const RateFit fit = boundary_rate(field, dom, ray, w.first, w.second);
    ctx.report.add(check, std::string(check) == "slope" ? fit.slope : fit.r2, fit.constant());
  }
}

void run_corner_rate(Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  const Domain2D dom = scenario_domain(c);
  const CornerChart chart = load_chart(c.fixture);
  const ConeSolution profile = corner_profile(c);
  const ScalarField field = solve_field(ctx, dom, profile);
  const double bis = c.param("bisector", 0.5 * M_PI);
  const Ray ray{Point2(chart.x0[0], chart.x0[1]), Point2(std::cos(bis), std::sin(bis))};
  for (const char* check : {"slope", "distance-slope", "r2", "form-agreement"}) {
    if (!ctx.report.enabled(check)) continue;
    const Window w = ctx.report.window(check);
    const CornerRate rate = corner_rate(field, profile, chart, ray, w.first, w.second);
    const std::string name = check;
    if (name == "slope") ctx.report.add(check, rate.map_form.slope, rate.map_form.constant());
    if (name == "distance-slope") ctx.report.add(check, rate.distance_form.slope, rate.distance_form.constant());
    if (name == "r2") ctx.report.add(check, std::min(rate.map_form.r2, rate.distance_form.r2));
    if (name == "form-agreement") {
      double worst = 1.0;
      for (std::size_t i = 0; i < rate.map_form.e.size(); ++i) {
        const double a = rate.map_form.e[i], b = rate.distance_form.e[i];
        worst = std::max(worst, std::max(a / b, b / a));
      }
      ctx.report.add(check, worst);
    }
  }
}

void run_interior_rays(Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  const Domain2D dom = scenario_domain(c);
  const ConeSolution profile = corner_profile(c);
  const ScalarField field = solve_field(ctx, dom, profile);
  const Point2 vertex(c.param("vertex_x", 0.0), c.param("vertex_y", 0.0));
  const PlanarFunction u = [&field](const Point2& x) { return field.sample(x); };
  const double wide = c.param("delta_wide", 0.5), narrow = c.param("delta_narrow", 0.25);
  if (ctx.report.enabled("slope")) {
    const Window w = ctx.report.window("slope");
    const RateFit fit = interior_ray_check(u, profile, dom, vertex, narrow, w.first, w.second, field.grid.h);
    ctx.report.add("slope", fit.slope, fit.constant());
  }
  if (ctx.report.enabled("constant-ratio")) {
    const Window w = ctx.report.window("constant-ratio");
    const RateFit a = interior_ray_check(u, profile, dom, vertex, wide, w.first, w.second, field.grid.h);
    const RateFit b = interior_ray_check(u, profile, dom, vertex, narrow, w.first, w.second, field.grid.h);
    ctx.report.add("constant-ratio", std::max(a.constant() / b.constant(), b.constant() / a.constant()));
  }
}

void run_levels(Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  const Domain2D dom = scenario_domain(c);
  CrossSectionOptions o;
  o.schedule = schedule_or(c, o.schedule);
  const CrossSectionResult res = solve_cross_section(c.n, dom, c.h, o);
  ctx.report.add("max-decrease", max_level_decrease(res.fields));
  const ScalarField& top = res.fields.back();
  const double radius = c.param("barrier_radius", 0.25);
  const int stride = static_cast<int>(c.param("probe_stride", 4));
  std::vector<Point2> probes;
  for (int j = 0; j < top.grid.ny; j += stride) {
    for (int i = 0; i < top.grid.nx; i += stride) {
      if (!top.inside(i, j)) continue;
      const Point2 p = top.grid.node(i, j);
      const double d = dom.distance(p);
      if (d >= 10 * c.h && d < radius) probes.push_back(p);
    }
  }
  const SandwichBarrierReport s = barrier_sandwich_check([&top](const Point2& x) { return top.sample(x); }, c.n, dom,
                                                         probes, radius, c.param("sandwich_tol", 1e-3));
  if (s.tested == 0) fail(ErrorCode::InsufficientSamples, "no probe admits both tangent disks");
  ctx.report.add("sandwich-pass-fraction", 1.0 - static_cast<double>(s.violations) / static_cast<double>(s.tested));
  ctx.report.add("sandwich-excess", std::max(s.worst_upper, s.worst_lower));
  ctx.save("field.csv", field_to_csv(top));
}

void run_field_bounds(Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  const Domain2D dom = scenario_domain(c);
  const ScalarField field = solve_field(ctx, dom, std::nullopt);
  if (ctx.report.enabled("bound-ratio")) {
    const BoundsReport b = bounds_check(field, dom, 1e9, 10 * c.h);
    ctx.report.add("bound-ratio", b.upper / std::pow(2.0, blowup_exponent(c.n)), b.lower);
  }
  if (ctx.report.enabled("derivative-slope")) {
    const Window w = ctx.report.window("derivative-slope");
    const DerivativeReport d = derivative_bound_check(field, dom, w.first, w.second);
    ctx.report.add("derivative-slope", std::abs(d.slope), d.C);
  }
}

Mat random_normals(std::mt19937_64& rng, int n, int k) {
  std::normal_distribution<double> gauss;
  for (;;) {
    Mat N(n, k);
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < n; ++i) N(i, j) = gauss(rng);
      N.col(j).normalize();
    }
    if ((N.transpose() * N).determinant() > 1e-3) return N;
  }
}

// Second intersection of two circles through the origin, found by bracketing on the first circle.
double chord_by_root_finding(double R1, double R2, double alpha) {
  const Point2 c1(R1, 0.0);
  const Point2 c2 = R2 * Point2(std::cos(alpha), std::sin(alpha));
  const auto on_first = [&](double t) { return Point2(c1 + R1 * Point2(std::cos(t), std::sin(t))); };
  const auto f = [&](double t) { return (on_first(t) - c2).squaredNorm() - R2 * R2; };
  // The origin sits at t = +-pi, so the other root lies strictly inside (-pi, pi).
  const int scan = 4096;
  const double lo = -M_PI + 1e-6, width = 2.0 * M_PI - 2e-6;
  for (int i = 0; i < scan; ++i) {
    const double a = lo + width * i / scan, b = lo + width * (i + 1) / scan;
    if (f(a) * f(b) > 0) continue;
    const auto bracket = boost::math::tools::bisect(f, a, b, [](double l, double r) { return r - l < 1e-15; });
    return on_first(0.5 * (bracket.first + bracket.second)).norm();
  }
  fail(ErrorCode::NoConvergence, "circles do not cross a second time");
}

void run_spheres(Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int trials = static_cast<int>(c.param("trials", 1000));
  const int max_dim = static_cast<int>(c.param("max_dim", 5));
  std::size_t good = 0;
  std::string rows = "trial,dim,k,r,chord,bound\n";
  for (int t = 0; t < trials; ++t) {
    const int k = 2 + static_cast<int>(unit(rng) * 3) % 3;
    const int n = std::max(k, 2) + static_cast<int>(unit(rng) * (max_dim - std::max(k, 2) + 1));
    const Mat N = random_normals(rng, std::min(n, max_dim), k);
    const int dim = static_cast<int>(N.rows());
    Vec p(dim);
    for (int i = 0; i < dim; ++i) p[i] = 2.0 * unit(rng) - 1.0;
    const double r = 0.25 + 2.0 * unit(rng);
    const SphereIntersection s = spheres_second_intersection(p, N, r);
    const double bound = sphere_chord_bound(N, r);
    bool on_all = true;
    for (int i = 0; i < k; ++i) on_all = on_all && std::abs((s.q - (p + r * N.col(i))).norm() - r) <= 1e-9 * r;
    if (on_all && s.chord > bound) ++good;
    rows += fmt::format("{},{},{},{},{},{}\n", t, dim, k, format_double(r), format_double(s.chord), format_double(bound));
  }
  ctx.report.add("pass-fraction", static_cast<double>(good) / trials);
  if (ctx.report.enabled("chord-error")) {
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      const double R1 = 0.2 + 3.0 * unit(rng), R2 = 0.2 + 3.0 * unit(rng), alpha = 0.05 + (M_PI - 0.1) * unit(rng);
      const double exact = chord_by_root_finding(R1, R2, alpha);
      worst = std::max(worst, std::abs(circle_chord(R1, R2, alpha) - exact) / exact);
    }
    ctx.report.add("chord-error", worst);
  }
  ctx.save("spheres.csv", rows);
}

void run_conformal(Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  const double a = c.param("a", 1.0);
  const double step = c.param("step", 1e-3);
  const int points = static_cast<int>(c.param("points", 100));
  const SolutionHandle u = pullback_solution(a, half_space(c.n));
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> box(-2.0 * a, 2.0 * a);
  double residual = 0.0, jacobian = 0.0;
  int used = 0;
  while (used < points) {
    Vec x(c.n);
    for (int i = 0; i < c.n; ++i) x[i] = box(rng);
    // Stay away from the pole and from the blow-up sphere so the stencils fit.
    if (a * a + 2 * a * x[0] + x.squaredNorm() < 0.25 * a * a) continue;
    bool fits = u.contains(x);
    for (int i = 0; i < c.n && fits; ++i) {
      for (double sgn : {-1.0, 1.0}) {
        Vec y = x;
        y[i] += sgn * 2 * step;
        fits = fits && u.contains(y);
      }
    }
    if (!fits) continue;
    Vec image = conformal_map(a, x);
    if (image[c.n - 1] < 0.05 * a) continue;
    residual = std::max(residual, std::abs(relative_pde_residual(u, x, step)));
    const Mat J = numeric_jacobian([a](const Vec& y) { return conformal_map(a, y); }, x, 1e-5);
    const double lam = conformal_factor(a, x);
    jacobian = std::max(jacobian, (J.transpose() * J - lam * lam * Mat::Identity(c.n, c.n)).norm());
    ++used;
  }
  ctx.report.add("pde-residual", residual);
  ctx.report.add("jacobian", jacobian);
}

void run_anisotropy(Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  ProfileOptions o;
  o.method = ProfileMethod::Substitution;
  const ConeSolution sol = solve_wedge_profile(c.n, c.param("omega", 0.5 * M_PI), c.J > 0 ? c.J : 4000, o);
  if (ctx.report.enabled("slope")) {
    const AnisotropyReport a = anisotropic_check(sol, c.param("ratio_min", 1.0), c.param("ratio_max", 100.0),
                                                 static_cast<int>(c.param("samples", 41)));
    ctx.report.add("slope", std::abs(a.slope), a.C);
  }
  if (ctx.report.enabled("difference-spread")) {
    const DifferenceReport d = difference_bound_check(sol, {0.01, 0.05, 0.1}, static_cast<int>(c.param("pairs", 2000)), c.seed);
    ctx.report.add("difference-spread", d.spread, *std::max_element(d.constants.begin(), d.constants.end()));
  }
}

void run_stability(Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  ProfileOptions o;
  o.method = ProfileMethod::Substitution;
  const int J = c.J > 0 ? c.J : 4000;
  const double omega = c.param("omega", 0.5 * M_PI);
  const ConeSolution base = solve_wedge_profile(c.n, omega, J, o);
  std::vector<double> ratios;
  std::string rows = "eps,sup_u,norm_N,ratio\n";
  for (const char* key : {"eps1", "eps2", "eps3"}) {
    const double eps = c.param(key, std::string(key) == "eps1" ? 0.01 : std::string(key) == "eps2" ? 0.02 : 0.05);
    const ConeSolution other = solve_wedge_profile(c.n, omega * (1.0 + eps), J, o);
    const CompareStats s = compare_cones(base, other, wedge_map(base, other));
    ratios.push_back(s.u_over_N);
    rows += fmt::format("{},{},{},{}\n", format_double(eps), format_double(s.sup_u), format_double(s.norm_N),
                        format_double(s.u_over_N));
  }
  const auto [mn, mx] = std::minmax_element(ratios.begin(), ratios.end());
  ctx.report.add("ratio-spread", *mx / *mn);
  ctx.save("stability.csv", rows);
}

void run_homogeneity(Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  ProfileOptions o;
  o.method = ProfileMethod::Substitution;
  const ConeSolution sol = solve_wedge_profile(c.n, c.param("omega", 2.0 * M_PI / 3.0), c.J > 0 ? c.J : 4000, o);
  const double b = sol.beta();
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < static_cast<int>(c.param("samples", 1000)); ++i) {
    const double theta = sol.theta_lo + (sol.theta_hi - sol.theta_lo) * unit(rng);
    const double lambda = std::pow(10.0, 2.0 * unit(rng) - 1.0);
    Vec x = Vec::Zero(c.n);
    x[0] = std::cos(sol.start_angle + theta);
    x[1] = std::sin(sol.start_angle + theta);
    x *= 0.5 + unit(rng);
    const double ratio_u = eval_coneSolution(sol, lambda * x) / (std::pow(lambda, -b) * eval_coneSolution(sol, x));
    const Vec d = wedge_cone(sol).normals.transpose() * x.head(2);
    const double ratio_f = eval_fV(sol, lambda * d) / (std::pow(lambda, -b) * eval_fV(sol, d));
    worst = std::max({worst, std::abs(ratio_u - 1.0), std::abs(ratio_f - 1.0)});
  }
  ctx.report.add("max-rel-error", worst);
}

void run_cone_sandwich(Context& ctx) {
  const ScenarioConfig& c = ctx.config;
  const CornerChart chart = load_chart(c.fixture);
  const auto samples = static_cast<std::size_t>(c.param("samples", 20000));
  std::size_t tested = 0, violations = 0;
  std::string rows = "r,shift,upper_tested,lower_tested,upper_violations,lower_violations\n";
  for (const char* key : {"r1", "r2"}) {
    const double r = c.param(key, std::string(key) == "r1" ? 0.05 : 0.1);
    const SandwichReport s = cone_sandwich_report(chart, r, samples, c.seed);
    tested += s.upper_tested + s.lower_tested;
    violations += s.upper_violations + s.lower_violations;
    rows += fmt::format("{},{},{},{},{},{}\n", format_double(r), format_double(s.shift), s.upper_tested, s.lower_tested,
                        s.upper_violations, s.lower_violations);
  }
  ctx.report.add("pass-fraction", tested ? 1.0 - static_cast<double>(violations) / static_cast<double>(tested) : 0.0,
                 static_cast<double>(tested));
  ctx.save("sandwich.csv", rows);
}

using Runner = void (*)(Context&);

Runner runner_for(const std::string& kind) {
  static const std::map<std::string, Runner> runners{
      {"radial", run_radial},
      {"wedge-profile", run_wedge_profile},
      {"zonal-profile", run_zonal_profile},
      {"boundary-rate", run_boundary_rate},
      {"corner-rate", run_corner_rate},
      {"interior-rays", run_interior_rays},
      {"levels", run_levels},
      {"field-bounds", run_field_bounds},
      {"spheres", run_spheres},
      {"conformal", run_conformal},
      {"anisotropy", run_anisotropy},
      {"stability", run_stability},
      {"homogeneity", run_homogeneity},
      {"cone-sandwich", run_cone_sandwich},
  };
  const auto it = runners.find(kind);
  if (it == runners.end()) fail(ErrorCode::ConfigError, "no runner for kind " + kind);
  return it->second;
}

std::string resolve_scenario(const std::string& name_or_path) {
  if (fs::exists(name_or_path)) return name_or_path;
  for (const CatalogEntry& e : list_scenarios()) {
    if (e.name == name_or_path) return e.path;
  }
  fail(ErrorCode::ConfigError, "unknown scenario '" + name_or_path + "'");
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorCode::ConfigError, "bad number '" + item + "'");
    }
  }
  return out;
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else write_text(path, text);
}

}  // namespace

ExitStatus exit_status_for(const Error& error) {
  switch (error.code()) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
      return kExitConfigError;
    case ErrorCode::BoundViolated:
    case ErrorCode::InsufficientSamples:
      return kExitCheckFailed;
    default:
      return kExitSolverFailed;
  }
}

bool ScenarioOutcome::passed() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.passed; });
}

std::string scenario_output_dir(const ScenarioConfig& config) {
  if (const char* env = std::getenv("BLOWUP_OUTPUT_DIR"); env && *env) return (fs::path(env) / config.name).string();
  return config.output;
}

ScenarioOutcome run_scenario(const ScenarioConfig& config) {
  Context ctx{config, Reporter(config), scenario_output_dir(config), {}};
  runner_for(config.kind)(ctx);
  ScenarioOutcome out;
  out.rows = ctx.report.take();
  const std::string report = (fs::path(ctx.dir) / "report.csv").string();
  write_text(report, report_to_csv(out.rows));
  out.files = std::move(ctx.files);
  out.files.push_back(report);
  return out;
}

int run_verify(const std::string& name_or_path) {
  try {
    const ScenarioConfig config = load_scenario(resolve_scenario(name_or_path));
    const auto start = std::chrono::steady_clock::now();
    const ScenarioOutcome out = run_scenario(config);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const ReportRow& r : out.rows) {
      std::cout << fmt::format("{} {} {} value={}{}\n", r.passed ? "PASS" : "FAIL", r.scenario, r.check,
                               format_double(r.value), r.constant ? " constant=" + format_double(*r.constant) : "");
    }
    std::cout << fmt::format("{}: {} checks, {:.2f} s, report {}\n", config.name, out.rows.size(), secs, out.files.back());
    return out.passed() ? kExitOk : kExitCheckFailed;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_status_for(e);
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Boundary blow-up solver and verification harness"};
  app.require_subcommand(1);

  int n = 3;
  int J = 0;
  double h = 0.01;
  std::string output, method, levels_text, domain = "disk", fixture_path, point_text;
  double r_in = 0.0, r_out = 1.0, omega = M_PI, aperture = 0.0, radius = 0.1;
  double D = 1.0, rho = 1.0;
  std::size_t samples = 20000;
  std::string scenario;
  std::vector<double> chord_args;

  auto* radial = app.add_subcommand("solve-radial", "radial ball or exterior shell profile");
  radial->add_option("--n", n, "dimension")->check(CLI::Range(3, 64));
  radial->add_option("--J", J, "grid intervals")->default_val(100000);
  radial->add_option("--r-in", r_in, "inner radius (0 for the ball)");
  radial->add_option("--r-out", r_out, "outer radius");
  radial->add_option("--levels", levels_text, "base,factor,count");
  radial->add_option("-o,--output", output, "CSV path (stdout when omitted)");

  auto* cone = app.add_subcommand("solve-cone", "angular profile of a wedge or circular cone");
  cone->add_option("--n", n, "dimension")->check(CLI::Range(3, 64));
  cone->add_option("--J", J, "angular intervals")->default_val(4000);
  cone->add_option("--omega", omega, "wedge opening");
  cone->add_option("--aperture", aperture, "circular cone aperture (selects the zonal profile)");
  cone->add_option("--method", method, "levels or substitution")->default_val("substitution");
  cone->add_option("--levels", levels_text, "base,factor,count");
  cone->add_option("-o,--output", output, "JSON path (stdout when omitted)");

  auto* field = app.add_subcommand("solve-domain", "blow-up solution on a planar cross-section");
  field->add_option("--n", n, "dimension")->check(CLI::Range(3, 64));
  field->add_option("--domain", domain, "disk, rectangle, ice-cream or line-arc");
  field->add_option("--spacing", h, "grid spacing");
  field->add_option("--omega", omega, "corner opening")->default_val(2.0 * M_PI / 3.0);
  field->add_option("--D", D, "ice-cream cap distance");
  field->add_option("--rho", rho, "line-arc radius");
  field->add_option("--method", method, "substitution or levels")->default_val("substitution");
  field->add_option("--levels", levels_text, "base,factor,count");
  field->add_option("-o,--output", output, "CSV path, or .json for the structured export")->required();

  auto* verify = app.add_subcommand("verify", "run a bundled scenario or a scenario file");
  verify->add_option("scenario", scenario, "catalog name or YAML path")->required();

  auto* geom = app.add_subcommand("geom", "geometry checks");
  geom->require_subcommand(1);
  auto* chord = geom->add_subcommand("chord", "chord of two circles crossing at angle alpha");
  chord->add_option("values", chord_args, "R1 R2 alpha")->expected(3)->required();
  auto* sandwich = geom->add_subcommand("sandwich", "shifted tangent-cone sandwich of a chart");
  sandwich->add_option("--fixture", fixture_path, "chart fixture")->required();
  sandwich->add_option("--r", radius, "ball radius");
  sandwich->add_option("--samples", samples, "sample count");
  auto* tmap = geom->add_subcommand("corner-map", "corner map T of a chart at a point");
  tmap->add_option("--fixture", fixture_path, "chart fixture")->required();
  tmap->add_option("--x", point_text, "comma-separated point")->required();

  app.add_subcommand("list", "bundled scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    auto schedule = [&](LevelSchedule fallback) {
      if (levels_text.empty()) return fallback;
      const std::vector<double> v = parse_numbers(levels_text);
      if (v.size() != 3) fail(ErrorCode::ConfigError, "--levels needs base,factor,count");
      return LevelSchedule{v[0], v[1], static_cast<int>(v[2])};
    };
    if (radial->parsed()) {
      RadialOptions o;
      o.schedule = schedule(o.schedule);
      if (r_in > 0) {
        Vec x = Vec::Zero(n);
        x[0] = r_out;
        o.outer_value = ball_exterior(n, r_in, Vec::Zero(n))(x);
      }
      write_or_print(output, radial_to_csv(solve_radial(n, r_in, r_out, J, o)));
    } else if (cone->parsed()) {
      ProfileOptions o;
      o.method = parse_profile_method(method);
      o.schedule = schedule(o.schedule);
      const ConeSolution sol = aperture > 0 ? solve_zonal_profile(n, aperture, J, o) : solve_wedge_profile(n, omega, J, o);
      write_or_print(output, to_json(sol) + "\n");
    } else if (field->parsed()) {
      ScenarioConfig c;
      c.domain = domain;
      c.source = "command line";
      c.params = {{"omega", omega}, {"D", D}, {"rho", rho}};
      const Domain2D dom = scenario_domain(c);
      ScalarField f;
      if (method == "levels") {
        CrossSectionOptions o;
        o.schedule = schedule(o.schedule);
        f = solve_cross_section(n, dom, h, o).fields.back();
      } else if (method == "substitution") {
        f = solve_cross_section_substitution(n, dom, h).field;
      } else {
        fail(ErrorCode::ConfigError, "unknown method '" + method + "'");
      }
      write_text(output, fs::path(output).extension() == ".json" ? field_to_json(f) : field_to_csv(f));
    } else if (verify->parsed()) {
      return run_verify(scenario);
    } else if (chord->parsed()) {
      std::cout << format_double(circle_chord(chord_args[0], chord_args[1], chord_args[2])) << "\n";
    } else if (sandwich->parsed()) {
      const SandwichReport s = cone_sandwich_report(load_chart(fixture_path), radius, samples);
      std::cout << fmt::format("{} shift={} upper {}/{} lower {}/{}\n", s.passed ? "PASS" : "FAIL", format_double(s.shift),
                               s.upper_violations, s.upper_tested, s.lower_violations, s.lower_tested);
      return s.passed ? kExitOk : kExitCheckFailed;
    } else if (tmap->parsed()) {
      const std::vector<double> v = parse_numbers(point_text);
      const Vec x = Eigen::Map<const Vec>(v.data(), static_cast<long>(v.size()));
      const Vec y = corner_map_T(load_chart(fixture_path), x);
      std::string line;
      for (long i = 0; i < y.size(); ++i) line += (i ? "," : "") + format_double(y[i]);
      std::cout << line << "\n";
    } else {
      for (const CatalogEntry& e : list_scenarios()) std::cout << fmt::format("{}\t{}\t{}\n", e.name, e.kind, e.anchor);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_status_for(e);
  }
  return kExitOk;
}

}  // namespace blowup
