#pragma once

#include <array>
#include <vector>

namespace blowup {

// Five-point Shortley-Weller stencil of one unknown. Directions are E, W, N, S.
struct Stencil5 {
  std::array<int, 4> nb{{-1, -1, -1, -1}};     // unknown index, or -1 when the arm hits the boundary
  std::array<double, 4> arm{{0, 0, 0, 0}};     // arm length (grid step unless cut by the boundary)
  std::array<double, 4> bval{{0, 0, 0, 0}};    // Dirichlet value at the boundary end of a cut arm
};

// Second- and first-derivative weights for one axis with arms hp (forward) and hm (backward).
struct AxisWeights {
  double cp, cm, c0;  // second derivative
  double gp, gm, g0;  // first derivative
};

inline AxisWeights axis_weights(double hp, double hm) {
  const double s = hp + hm;
  return {2.0 / (hp * s), 2.0 / (hm * s), -2.0 / (hp * hm), hm / (hp * s), -hp / (hm * s), (hp - hm) / (hp * hm)};
}

// Analytic reference added to the discrete unknown in the substitution form: w = W + psi.
struct ReferenceData {
  std::vector<double> W, lap, gx, gy;
};

// Row of the Newton system: diagonal followed by the E, W, N, S couplings.
using JacobianRow = std::array<double, 5>;

// Truncated problem Lap u = c u^p. F and rows are sized like the stencil list.
void assemble_u_serial(const std::vector<Stencil5>& st, int n, const std::vector<double>& u,
                       std::vector<double>& F, std::vector<JacobianRow>& rows);
void assemble_u_parallel(const std::vector<Stencil5>& st, int n, const std::vector<double>& u,
                         std::vector<double>& F, std::vector<JacobianRow>& rows);
// Frozen-coefficient (Picard) linearization around u: Lap v - c u^{p-1} v.
void assemble_u_picard(const std::vector<Stencil5>& st, int n, const std::vector<double>& u,
                       std::vector<double>& F, std::vector<JacobianRow>& rows);

// Substitution form w Lap w - (n/2)(|grad w|^2 - 1) = 0 for the correction psi; ref may be empty.
void assemble_w_serial(const std::vector<Stencil5>& st, int n, const ReferenceData& ref,
                       const std::vector<double>& psi, std::vector<double>& F, std::vector<JacobianRow>& rows);
void assemble_w_parallel(const std::vector<Stencil5>& st, int n, const ReferenceData& ref,
                         const std::vector<double>& psi, std::vector<double>& F, std::vector<JacobianRow>& rows);

}  // namespace blowup
