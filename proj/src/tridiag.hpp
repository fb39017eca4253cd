#pragma once

#include <vector>

namespace blowup::detail {

// Thomas algorithm for lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i].
// lower[0] and upper[m-1] are ignored. Returns false on a zero pivot.
inline bool solve_tridiagonal(const std::vector<double>& lower, const std::vector<double>& diag,
                              const std::vector<double>& upper, std::vector<double>& rhs) {
  const std::size_t m = diag.size();
  std::vector<double> c(m);
  double denom = diag[0];
  if (denom == 0.0) return false;
  c[0] = upper[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < m; ++i) {
    denom = diag[i] - lower[i] * c[i - 1];
    if (denom == 0.0) return false;
    c[i] = i + 1 < m ? upper[i] / denom : 0.0;
    rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = m - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
  return true;
}

}  // namespace blowup::detail
