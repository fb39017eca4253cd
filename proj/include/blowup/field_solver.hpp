#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "blowup/cone_solver.hpp"
#include "blowup/domain.hpp"
#include "blowup/kernels.hpp"

namespace blowup {

// Node (i, j) sits at (x0 + i h, y0 + j h).
struct GridSpec {
  double x0 = 0.0, y0 = 0.0, h = 0.0;
  int nx = 0, ny = 0;
  Point2 node(int i, int j) const { return {x0 + i * h, y0 + j * h}; }
  std::size_t flat(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
};

// Grid covering the domain's bounding box with `anchor` on a node.
GridSpec make_grid(const Domain2D& domain, double h, const Point2& anchor = Point2::Zero());

enum NodeKind : std::uint8_t { kOutside = 0, kInterior = 1, kNearBoundary = 2 };

struct ScalarField {
  int n = 3;
  GridSpec grid;
  std::vector<std::uint8_t> mask;
  std::vector<double> u;  // solution values; zero off the mask
  std::vector<double> w;  // u^{-2/(n-2)} when produced by the substitution solver
  double level = 0.0;     // truncation level; zero for blow-up (substitution) fields

  bool inside(int i, int j) const;
  double at(int i, int j) const { return u[grid.flat(i, j)]; }
  // Node value when x is a grid node, otherwise tensor cubic interpolation (of w when present).
  // Throws OutsideWindow when the stencil leaves the mask.
  double sample(const Point2& x) const;
};

struct ProbeEstimate {
  Point2 x;
  double value = 0.0;
  double error = 0.0;
  bool reliable = false;
};

struct SolveReport {
  std::vector<double> levels;
  std::vector<int> newton_iterations;
  std::vector<double> final_residuals;
  int picard_steps = 0;
  std::size_t unknowns = 0;
  std::vector<ProbeEstimate> probes;
  double seconds = 0.0;
};

struct CrossSectionOptions {
  LevelSchedule schedule{10.0, 2.0, 10};
  int max_newton = 100;
  double update_tol = 1e-12;  // stop once a full step changes u by less than this (relative)
  bool parallel = true;
  std::vector<Point2> probes;  // extrapolated into the report
  double probe_tol = 1e-4;
};

struct CrossSectionResult {
  std::vector<ScalarField> fields;  // one per level
  SolveReport report;
};

CrossSectionResult solve_cross_section(int n, const Domain2D& domain, double h, const CrossSectionOptions& options = {});

// Tangent-cone profile removed analytically near a corner: w = chi(|x - vertex|) r q(theta) + psi.
struct CornerReference {
  Point2 vertex = Point2::Zero();
  ConeSolution profile;  // substitution wedge profile, rotated to the tangent cone
  double r_inner = 0.2;  // cutoff equals one inside this radius
  double r_outer = 0.42; // and vanishes outside this one
};

struct SubstitutionOptions {
  double tol = 1e-10;
  int max_iter = 300;
  double dt0 = 1e-2;
  bool parallel = true;
  std::optional<CornerReference> corner;
};

struct SubstitutionResult {
  ScalarField field;
  SolveReport report;
};

// Blow-up solution through w = u^{-2/(n-2)}, which vanishes on the boundary; pseudo-transient
// continuation globalizes the Newton iteration.
SubstitutionResult solve_cross_section_substitution(int n, const Domain2D& domain, double h,
                                                    const SubstitutionOptions& options = {});

// Smooth cutoff equal to one on [0, r1] and zero on [r2, inf), with two derivatives.
struct CutoffJet {
  double value, d1, d2;
};
CutoffJet smooth_cutoff(double r, double r1, double r2);

// Radial profile on [r_in, r_out] with blow-up at r_out (ball, r_in = 0) or at r_in (shell).
struct RadialProfile {
  int n = 3;
  double r_in = 0.0, r_out = 1.0, h = 0.0;
  std::vector<double> r;
  std::vector<double> levels;
  std::vector<std::vector<double>> level_values;
  std::vector<double> u;      // extrapolated limit
  std::vector<double> error;  // tail correction size per node
  std::vector<int> newton_iterations;
  // Linear interpolation of the extrapolated limit.
  double eval(double radius) const;
};

struct RadialOptions {
  LevelSchedule schedule{10.0, 2.0, 13};
  int max_newton = 100;
  double outer_value = 0.0;  // shell case: Dirichlet value at r_out
  // Dimension of the radial Laplacian; zero means n. Two gives the disk cross-section of a cylinder.
  int laplacian_dim = 0;
};

RadialProfile solve_radial(int n, double r_in, double r_out, int J, const RadialOptions& options = {});

// Geometric-tail limit at each probe from the last three level fields.
std::vector<ProbeEstimate> extrapolate_truncation(const std::vector<ScalarField>& fields,
                                                  const std::vector<Point2>& probes, double tol);

// Interior stencils of a grid over a domain, with the boundary crossings of cut arms.
struct StencilSet {
  GridSpec grid;
  std::vector<std::uint8_t> mask;
  std::vector<int> index;            // unknown index per grid node, -1 off the mask
  std::vector<std::pair<int, int>> nodes;  // grid coordinates per unknown
  std::vector<Stencil5> stencils;
  std::vector<Point2> crossings;     // boundary point per (unknown, direction), NaN when uncut
};
StencilSet build_stencils(const Domain2D& domain, double h, const Point2& anchor = Point2::Zero());

}  // namespace blowup
