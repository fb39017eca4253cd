#include "blowup/kernels.hpp"

#include <cmath>

#include "blowup/closed_forms.hpp"

namespace blowup {

namespace {

inline double neighbor(const Stencil5& s, int d, const double* x) { return s.nb[d] >= 0 ? x[s.nb[d]] : s.bval[d]; }

inline void u_node(const Stencil5& s, int i, double c, double p, const double* u, double& f, JacobianRow& row,
                   bool frozen) {
  const AxisWeights ax = axis_weights(s.arm[0], s.arm[1]);
  const AxisWeights ay = axis_weights(s.arm[2], s.arm[3]);
  const double ui = u[i];
  const double lap = ax.cp * neighbor(s, 0, u) + ax.cm * neighbor(s, 1, u) + ay.cp * neighbor(s, 2, u) +
                     ay.cm * neighbor(s, 3, u) + (ax.c0 + ay.c0) * ui;
  const double up1 = std::pow(ui, p - 1.0);
  f = lap - c * up1 * ui;
  row[0] = ax.c0 + ay.c0 - (frozen ? c : c * p) * up1;
  row[1] = ax.cp;
  row[2] = ax.cm;
  row[3] = ay.cp;
  row[4] = ay.cm;
}

inline void w_node(const Stencil5& s, int i, double half_n, const ReferenceData& ref, const double* psi, double& f,
                   JacobianRow& row) {
  const AxisWeights ax = axis_weights(s.arm[0], s.arm[1]);
  const AxisWeights ay = axis_weights(s.arm[2], s.arm[3]);
  const double pi = psi[i];
  const double e = neighbor(s, 0, psi), w = neighbor(s, 1, psi);
  const double nn = neighbor(s, 2, psi), so = neighbor(s, 3, psi);
  const bool has_ref = !ref.W.empty();
  const double lap = ax.cp * e + ax.cm * w + ay.cp * nn + ay.cm * so + (ax.c0 + ay.c0) * pi + (has_ref ? ref.lap[i] : 0.0);
  const double gx = ax.gp * e + ax.gm * w + ax.g0 * pi + (has_ref ? ref.gx[i] : 0.0);
  const double gy = ay.gp * nn + ay.gm * so + ay.g0 * pi + (has_ref ? ref.gy[i] : 0.0);
  const double wi = pi + (has_ref ? ref.W[i] : 0.0);
  f = wi * lap - half_n * (gx * gx + gy * gy - 1.0);
  const double two = 2.0 * half_n;
  row[0] = lap + wi * (ax.c0 + ay.c0) - two * (gx * ax.g0 + gy * ay.g0);
  row[1] = wi * ax.cp - two * gx * ax.gp;
  row[2] = wi * ax.cm - two * gx * ax.gm;
  row[3] = wi * ay.cp - two * gy * ay.gp;
  row[4] = wi * ay.cm - two * gy * ay.gm;
}

void size_outputs(std::size_t m, std::vector<double>& F, std::vector<JacobianRow>& rows) {
  F.resize(m);
  rows.resize(m);
}

}  // namespace

void assemble_u_serial(const std::vector<Stencil5>& st, int n, const std::vector<double>& u, std::vector<double>& F,
                       std::vector<JacobianRow>& rows) {
  size_outputs(st.size(), F, rows);
  const double c = nonlinear_coefficient(n), p = nonlinear_power(n);
  const int m = static_cast<int>(st.size());
  for (int i = 0; i < m; ++i) u_node(st[i], i, c, p, u.data(), F[i], rows[i], false);
}

void assemble_u_parallel(const std::vector<Stencil5>& st, int n, const std::vector<double>& u, std::vector<double>& F,
                         std::vector<JacobianRow>& rows) {
  size_outputs(st.size(), F, rows);
  const double c = nonlinear_coefficient(n), p = nonlinear_power(n);
  const int m = static_cast<int>(st.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) u_node(st[i], i, c, p, u.data(), F[i], rows[i], false);
}

void assemble_u_picard(const std::vector<Stencil5>& st, int n, const std::vector<double>& u, std::vector<double>& F,
                       std::vector<JacobianRow>& rows) {
  size_outputs(st.size(), F, rows);
  const double c = nonlinear_coefficient(n), p = nonlinear_power(n);
  const int m = static_cast<int>(st.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) u_node(st[i], i, c, p, u.data(), F[i], rows[i], true);
}

void assemble_w_serial(const std::vector<Stencil5>& st, int n, const ReferenceData& ref, const std::vector<double>& psi,
                       std::vector<double>& F, std::vector<JacobianRow>& rows) {
  size_outputs(st.size(), F, rows);
  const int m = static_cast<int>(st.size());
  for (int i = 0; i < m; ++i) w_node(st[i], i, 0.5 * n, ref, psi.data(), F[i], rows[i]);
}

void assemble_w_parallel(const std::vector<Stencil5>& st, int n, const ReferenceData& ref,
                         const std::vector<double>& psi, std::vector<double>& F, std::vector<JacobianRow>& rows) {
  size_outputs(st.size(), F, rows);
  const int m = static_cast<int>(st.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) w_node(st[i], i, 0.5 * n, ref, psi.data(), F[i], rows[i]);
}

}  // namespace blowup
