#pragma once

#include <vector>

namespace blowup {

struct TailEstimate {
  double value = 0.0;
  double error = 0.0;        // size of the applied tail correction
  bool contracting = false;  // false when successive differences do not shrink
};

// Geometric-tail limit of an increasing sequence from its last three terms. Differences below
// `flat_tol` (relative) count as converged. Throws NonMonotoneTail when a difference is negative
// beyond `monotone_tol` (absolute).
TailEstimate geometric_tail(double v0, double v1, double v2, double monotone_tol = 1e-9,
                            double flat_tol = 1e-14);

}  // namespace blowup
