#pragma once

// HardShrink drift penalty. The penalty is minimized, so trainers that
// maximize a likelihood subtract its gradient.

#include <vector>

#include "diachron/matrix.hpp"

namespace diachron {

// x if x > beta, -x if x < -beta, 0 otherwise.
inline double hardshrink(double x, double beta) {
  if (x > beta) return x;
  if (x < -beta) return -x;
  return 0.0;
}

struct RegConfig {
  bool enabled = false;
  double alpha = 0.0;
  double beta = 0.0;
  bool beta_is_mean = false;  // refresh beta to the mean drift once per epoch

  void validate() const;
  bool active() const noexcept { return enabled && alpha > 0.0; }
};

// alpha * sum_i hardshrink(||u_{i,t} - u_{i,ref}||, beta)
double drift_regularizer(const Matrix& U_t, const Matrix& U_ref, double alpha, double beta);

// Adds scale * d(reg)/dU_t into `grad` (U_ref is treated as a constant):
// alpha (u_t - u_ref) / drift for rows with drift > beta, nothing otherwise.
void add_drift_regularizer_gradient(const Matrix& U_t, const Matrix& U_ref, double alpha,
                                    double beta, double scale, Matrix& grad);

// Mean per-word drift between two matrices (the "mean" threshold).
double mean_drift(const Matrix& U_t, const Matrix& U_ref);

}  // namespace diachron
